"""Per-step linear and nonlinear solves shared by the grid models.

The implicit trapezoidal momentum equation is solved by Picard iteration
with a pressure projection each sweep; the magnetic and Cayley-cell
systems are near-identity and solved by plain fixed-point iteration,
which (unlike a Krylov method) keeps div(B) and the cell-sum invariants
exact at every iterate.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConstraintViolated, IncompatibleRHS, NoConvergence, PoissonNoConvergence
from .grid import (
    CellField,
    GridSpec,
    StaggeredVectorField,
    divergence_cell,
    grad_edges,
    _phi_raw,
)

__all__ = [
    "SolverConfig",
    "MomentumResult",
    "poisson_solve",
    "momentum_solve",
    "magnetic_solve",
    "apply_cayley_cells",
]


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budgets and tolerances for the per-step solves."""

    picard_max: int = 400
    residual_tol: float = 1e-10
    poisson_tol: float = 1e-12
    linear_max_iter: int = 4000

    def __post_init__(self):
        if self.residual_tol <= 0 or self.poisson_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.picard_max < 1 or self.linear_max_iter < 1:
            raise ValueError("iteration caps must be at least 1")


class MomentumResult(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    p: CellField
    iterations: int
    residual: float
    history: tuple = ()  # per-iteration residuals


# ---------------------------------------------------------------------------
# Poisson solve (five-point Laplacian, cached sparse LU)
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _poisson_factorization(grid: GridSpec):
    nx, ny, eps = grid.nx, grid.ny, grid.eps
    n = nx * ny
    idx = lambda i, j: i * ny + j
    rows, cols, vals = [], [], []
    for i in range(nx):
        for j in range(ny):
            c = idx(i, j)
            neighbors = []
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if grid.periodic:
                    neighbors.append(idx(ii % nx, jj % ny))
                elif 0 <= ii < nx and 0 <= jj < ny:
                    neighbors.append(idx(ii, jj))
            for nb in neighbors:
                rows.append(c)
                cols.append(nb)
                vals.append(1.0 / eps**2)
            rows.append(c)
            cols.append(c)
            vals.append(-len(neighbors) / eps**2)
    lap = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    # Pin cell 0 to fix the constant null vector; the pinned system is
    # exact for compatible right-hand sides.
    pinned = lap.tolil()
    pinned[0, :] = 0.0
    pinned[0, 0] = 1.0
    lu = scipy.sparse.linalg.splu(pinned.tocsc())
    return lap, lu


def poisson_solve(rhs: CellField, grid: GridSpec, tol: float = 1e-12) -> CellField:
    """Solve Lap(phi) = rhs with the grid's boundary closure, mean-zero phi.

    The right-hand side must be compatible (zero eps^2-weighted sum); the
    solution is exact to the sparse-LU roundoff, checked against tol.
    """
    vals = rhs.values
    eps2 = grid.eps**2
    total = float(vals.sum() * eps2)
    if abs(total) > 1e-10 * max(1.0, eps2 * float(np.abs(vals).sum())):
        raise IncompatibleRHS(f"rhs integrates to {total:.3e}, not zero")
    lap, lu = _poisson_factorization(grid)
    b = (vals - vals.mean()).ravel()
    b_pinned = b.copy()
    b_pinned[0] = 0.0
    phi = lu.solve(b_pinned)
    scale = max(1.0, float(np.abs(b).max()))
    for _ in range(3):  # iterative refinement: LU roundoff grows with N
        r = b - lap @ phi
        r -= r.mean()
        if np.abs(r).max() <= 0.01 * tol * scale:
            break
        r_pinned = r.copy()
        r_pinned[0] = 0.0
        phi = phi + lu.solve(r_pinned)
    phi -= phi.mean()
    resid = float(np.abs(lap @ phi - b).max()) / scale
    if resid > tol:
        raise PoissonNoConvergence(f"Poisson residual {resid:.3e} exceeds {tol:.1e}", residual=resid)
    return CellField(grid, phi.reshape(grid.cell_shape))


# ---------------------------------------------------------------------------
# Implicit momentum solve: Picard + pressure projection
# ---------------------------------------------------------------------------


def momentum_solve(
    w_prev: StaggeredVectorField,
    explicit_rhs: StaggeredVectorField,
    implicit_rhs: Callable[[StaggeredVectorField], StaggeredVectorField],
    grid: GridSpec,
    cfg: SolverConfig,
    h: float,
) -> MomentumResult:
    """Solve w = w_prev + explicit_rhs + implicit_rhs(w) - h grad(p), div w = 0.

    implicit_rhs carries the trapezoidal half of the advection operator
    evaluated at the unknown level; it is frozen at the current iterate
    and the resulting linear saddle system is closed by projection.  The
    reported residual is the max-norm defect of the momentum stencil
    equation divided by h.  After 10 non-decreasing residuals the
    iteration relaxes with factor 0.5.
    """
    base = w_prev + explicit_rhs
    w_star = w_prev
    phi = CellField.zeros(grid)
    best = np.inf
    stall = 0
    relax = 1.0
    history = []
    for it in range(1, cfg.picard_max + 1):
        target = base + implicit_rhs(w_star)
        if not grid.periodic:
            tu, tv = target.u.copy(), target.v.copy()
            tu[0, :] = tu[-1, :] = 0.0
            tv[:, 0] = tv[:, -1] = 0.0
            target = StaggeredVectorField(grid, tu, tv)
        phi = poisson_solve(divergence_cell(target), grid, cfg.poisson_tol)
        w_new = target - grad_edges(phi)
        lag = implicit_rhs(w_new) - implicit_rhs(w_star)
        resid = max(np.abs(lag.u).max(initial=0.0), np.abs(lag.v).max(initial=0.0)) / abs(h)
        history.append(resid)
        if resid <= cfg.residual_tol:
            p = CellField(grid, phi.values / h)
            return MomentumResult(w_new.u, w_new.v, p, it, resid, tuple(history))
        if resid >= best:
            stall += 1
        else:
            best, stall = resid, 0
        if stall > 10:
            # non-contracting: damp the update, halving on repeated stalls
            relax = max(0.5 * relax, 2.0**-8)
            stall = 0
        w_star = w_star + relax * (w_new - w_star)
    raise NoConvergence(
        f"momentum Picard iteration did not reach {cfg.residual_tol:.1e}",
        residual=resid,
        iterations=cfg.picard_max,
    )


# ---------------------------------------------------------------------------
# Linear magnetic update (trapezoidal Lie transport)
# ---------------------------------------------------------------------------


def magnetic_solve(
    adv: StaggeredVectorField,
    b_prev: StaggeredVectorField,
    h: float,
    grid: GridSpec,
    cfg: SolverConfig,
) -> tuple[StaggeredVectorField, float]:
    """Solve B + (h/2) Phi(adv, B) = B_prev - (h/2) Phi(adv, B_prev).

    Fixed-point iteration on the near-identity system; every iterate has
    exactly the divergence of B_prev because div(Phi(...)) vanishes
    identically.  Returns (B_new, final residual).
    """
    eps_tol = min(cfg.residual_tol, 1e-12)
    fx, fy = _phi_raw(adv.u, adv.v, b_prev.u, b_prev.v, grid)
    rhs_u = b_prev.u - 0.5 * h * fx
    rhs_v = b_prev.v - 0.5 * h * fy
    xu, xv = b_prev.u.copy(), b_prev.v.copy()
    resid = np.inf
    first = None
    for _ in range(cfg.linear_max_iter):
        gx, gy = _phi_raw(adv.u, adv.v, xu, xv, grid)
        nu = rhs_u - 0.5 * h * gx
        nv = rhs_v - 0.5 * h * gy
        resid = max(np.abs(nu - xu).max(initial=0.0), np.abs(nv - xv).max(initial=0.0))
        xu, xv = nu, nv
        if resid <= eps_tol:
            return StaggeredVectorField(grid, xu, xv), resid
        if first is None:
            first = resid
        elif not np.isfinite(resid) or resid > 1e6 * first:
            break  # diverging: h too large for the fixed point
    raise NoConvergence(f"magnetic fixed point stalled at {resid:.3e}", residual=resid)


# ---------------------------------------------------------------------------
# Matrix-free Cayley transport of cell fields
# ---------------------------------------------------------------------------


def _flux_apply(adv: StaggeredVectorField, x: np.ndarray, grid: GridSpec) -> np.ndarray:
    """(Y x)_m for the flux matrix Y of the advecting field.

    Central advection: (u_l x_l - u_r x_r + v_b x_b - v_t x_t) / (2 eps).
    Column sums of Y vanish for divergence-free advection, so sum(Yx) = 0.
    """
    u, v, eps = adv.u, adv.v, grid.eps
    if grid.periodic:
        out = (
            u * np.roll(x, 1, 0)
            - np.roll(u, -1, 0) * np.roll(x, -1, 0)
            + v * np.roll(x, 1, 1)
            - np.roll(v, -1, 1) * np.roll(x, -1, 1)
        )
    else:
        xp = np.pad(x, 1)  # zero ghosts; wall-normal edges are zero anyway
        out = (
            u[:-1, :] * xp[:-2, 1:-1]
            - u[1:, :] * xp[2:, 1:-1]
            + v[:, :-1] * xp[1:-1, :-2]
            - v[:, 1:] * xp[1:-1, 2:]
        )
    return out / (2.0 * eps)


def _flux_row_bound(adv: StaggeredVectorField, grid: GridSpec) -> float:
    """Gershgorin bound on the spectral radius of the flux matrix."""
    u, v = np.abs(adv.u), np.abs(adv.v)
    if grid.periodic:
        total = u + np.roll(u, -1, axis=0) + v + np.roll(v, -1, axis=1)
    else:
        total = u[:-1, :] + u[1:, :] + v[:, :-1] + v[:, 1:]
    return float(total.max(initial=0.0)) / (2.0 * grid.eps)


def apply_cayley_cells(
    adv: StaggeredVectorField,
    x: CellField,
    scale: float,
    grid: GridSpec,
    cfg: SolverConfig,
    div_tol: float = 1e-10,
) -> CellField:
    """Apply cay(scale * Y) to a cell field, matrix-free.

    Solves (I - (scale/2) Y) x_new = (I + (scale/2) Y) x by fixed point;
    each iterate conserves the eps^2-weighted sum exactly.  Inverted by
    applying with -scale.
    """
    dmax = np.abs(divergence_cell(adv).values).max()
    if dmax > div_tol or adv.wall_normal_max() > div_tol:
        raise ConstraintViolated(f"advecting field violates constraints (div {dmax:.3e})")
    s = 0.5 * scale
    rhs = x.values + s * _flux_apply(adv, x.values, grid)
    # Y is antisymmetric (purely imaginary spectrum), so damped Richardson
    # with beta = 1/(1 + m^2), m >= |s| rho(Y), always contracts; the
    # damped iterate still conserves sum(x) exactly.
    m = abs(s) * _flux_row_bound(adv, grid)
    beta = 1.0 / (1.0 + m * m)
    xn = x.values.copy()
    tol = min(cfg.residual_tol, 1e-12)
    resid = np.inf
    for _ in range(cfg.linear_max_iter):
        defect = rhs + s * _flux_apply(adv, xn, grid) - xn
        resid = np.abs(defect).max(initial=0.0)
        if resid <= tol:
            return CellField(grid, xn)
        xn = xn + beta * defect
    raise NoConvergence(f"Cayley cell transport stalled at {resid:.3e}", residual=resid)
