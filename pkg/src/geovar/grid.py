"""Uniform 2-D staggered cartesian grid, fields, and discrete operators.

MAC/Yee arrangement: horizontal velocity u lives on vertical edges
(i, j+1/2), vertical velocity v on horizontal edges (i+1/2, j), scalars
at cell centers (i+1/2, j+1/2), curls and stream functions at vertices
(i, j).  Array conventions (axis 0 = x, axis 1 = y):

    periodic        u: (nx, ny)    v: (nx, ny)    vertices: (nx, ny)
    no-normal-flow  u: (nx+1, ny)  v: (nx, ny+1)  vertices: (nx+1, ny+1)

Cell fields are always (nx, ny).  With walls, u[0], u[nx] and v[:, 0],
v[:, ny] are the wall-normal components (zero for admissible fields).
Out-of-domain edge values referenced by wall stencils are taken as zero;
this closure keeps the discrete integration-by-parts identities behind
the conservation proofs exact (see tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ShapeMismatch, ConstraintViolated

__all__ = [
    "Boundary",
    "GridSpec",
    "StaggeredVectorField",
    "CellField",
    "VertexField",
    "curl_vertex",
    "divergence_cell",
    "psi_op",
    "phi_op",
    "lambda_op",
    "laplacian_cell",
    "grad_edges",
    "from_stream_function",
    "from_vector_potential",
    "project_divergence_free",
]

Boundary = Literal["periodic", "no-normal-flow"]


@dataclass(frozen=True)
class GridSpec:
    """Uniform square-cell grid: nx x ny cells of spacing eps."""

    nx: int
    ny: int
    eps: float
    boundary: Boundary = "periodic"

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("nx, ny must be at least 3")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.boundary not in ("periodic", "no-normal-flow"):
            raise ValueError(f"unknown boundary type {self.boundary!r}")

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def cell_shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def u_shape(self) -> tuple[int, int]:
        return (self.nx, self.ny) if self.periodic else (self.nx + 1, self.ny)

    @property
    def v_shape(self) -> tuple[int, int]:
        return (self.nx, self.ny) if self.periodic else (self.nx, self.ny + 1)

    @property
    def vertex_shape(self) -> tuple[int, int]:
        return (self.nx, self.ny) if self.periodic else (self.nx + 1, self.ny + 1)


@dataclass(frozen=True)
class StaggeredVectorField:
    """Edge-sampled vector field (velocity or magnetic)."""

    grid: GridSpec
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.shape != self.grid.u_shape or v.shape != self.grid.v_shape:
            raise ShapeMismatch(
                f"expected u {self.grid.u_shape}, v {self.grid.v_shape}; got {u.shape}, {v.shape}"
            )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "StaggeredVectorField":
        return cls(grid, np.zeros(grid.u_shape), np.zeros(grid.v_shape))

    def wall_normal_max(self) -> float:
        """Largest wall-normal component (0.0 on periodic grids)."""
        if self.grid.periodic:
            return 0.0
        return max(
            np.abs(self.u[0]).max(), np.abs(self.u[-1]).max(),
            np.abs(self.v[:, 0]).max(), np.abs(self.v[:, -1]).max(),
        )

    def __add__(self, other: "StaggeredVectorField") -> "StaggeredVectorField":
        return StaggeredVectorField(self.grid, self.u + other.u, self.v + other.v)

    def __sub__(self, other: "StaggeredVectorField") -> "StaggeredVectorField":
        return StaggeredVectorField(self.grid, self.u - other.u, self.v - other.v)

    def __mul__(self, c: float) -> "StaggeredVectorField":
        return StaggeredVectorField(self.grid, c * self.u, c * self.v)

    __rmul__ = __mul__


@dataclass(frozen=True)
class CellField:
    """Cell-centered scalar field, shape (nx, ny)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.cell_shape:
            raise ShapeMismatch(f"expected {self.grid.cell_shape}, got {vals.shape}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "CellField":
        return cls(grid, np.zeros(grid.cell_shape))

    def __add__(self, other: "CellField") -> "CellField":
        return CellField(self.grid, self.values + other.values)

    def __sub__(self, other: "CellField") -> "CellField":
        return CellField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "CellField":
        return CellField(self.grid, c * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True)
class VertexField:
    """Vertex-centered scalar field (curl, stream function, potential)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.vertex_shape:
            raise ShapeMismatch(f"expected {self.grid.vertex_shape}, got {vals.shape}")
        object.__setattr__(self, "values", vals)


# ---------------------------------------------------------------------------
# Vertex interpolation helpers (raw arrays; ghost edges outside walls are 0)
# ---------------------------------------------------------------------------


def _vertex_u_avg(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Average of the two u-edges meeting each vertex along y."""
    if grid.periodic:
        return 0.5 * (np.roll(u, 1, axis=1) + u)
    pad = np.zeros((grid.nx + 1, grid.ny + 2))
    pad[:, 1:-1] = u
    return 0.5 * (pad[:, :-1] + pad[:, 1:])


def _vertex_v_avg(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Average of the two v-edges meeting each vertex along x."""
    if grid.periodic:
        return 0.5 * (np.roll(v, 1, axis=0) + v)
    pad = np.zeros((grid.nx + 2, grid.ny + 1))
    pad[1:-1, :] = v
    return 0.5 * (pad[:-1, :] + pad[1:, :])


def _vertex_curl(u: np.ndarray, v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """omega^{i,j} = (u^{i,j-1/2} + v^{i+1/2,j} - u^{i,j+1/2} - v^{i-1/2,j}) / eps."""
    if grid.periodic:
        return (np.roll(u, 1, axis=1) - u + v - np.roll(v, 1, axis=0)) / grid.eps
    pu = np.zeros((grid.nx + 1, grid.ny + 2))
    pu[:, 1:-1] = u
    pv = np.zeros((grid.nx + 2, grid.ny + 1))
    pv[1:-1, :] = v
    return (pu[:, :-1] - pu[:, 1:] + pv[1:, :] - pv[:-1, :]) / grid.eps


def _edge_from_vertex_x(w: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Average vertex values to vertical (u-type) edges: endpoints along y."""
    if grid.periodic:
        return 0.5 * (w + np.roll(w, -1, axis=1))
    return 0.5 * (w[:, :-1] + w[:, 1:])


def _edge_from_vertex_y(w: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Average vertex values to horizontal (v-type) edges: endpoints along x."""
    if grid.periodic:
        return 0.5 * (w + np.roll(w, -1, axis=0))
    return 0.5 * (w[:-1, :] + w[1:, :])


def _ddy_vertex_to_uedge(w: np.ndarray, grid: GridSpec) -> np.ndarray:
    if grid.periodic:
        return (np.roll(w, -1, axis=1) - w) / grid.eps
    return (w[:, 1:] - w[:, :-1]) / grid.eps


def _ddx_vertex_to_vedge(w: np.ndarray, grid: GridSpec) -> np.ndarray:
    if grid.periodic:
        return (np.roll(w, -1, axis=0) - w) / grid.eps
    return (w[1:, :] - w[:-1, :]) / grid.eps


# ---------------------------------------------------------------------------
# Public operators
# ---------------------------------------------------------------------------


def curl_vertex(w: StaggeredVectorField) -> VertexField:
    """Discrete curl at vertices."""
    return VertexField(w.grid, _vertex_curl(w.u, w.v, w.grid))


def divergence_cell(w: StaggeredVectorField) -> CellField:
    """Net edge flux out of each cell, divided by eps."""
    g = w.grid
    if g.periodic:
        div = (np.roll(w.u, -1, axis=0) - w.u + np.roll(w.v, -1, axis=1) - w.v) / g.eps
    else:
        div = (w.u[1:, :] - w.u[:-1, :] + w.v[:, 1:] - w.v[:, :-1]) / g.eps
    return CellField(g, div)


def _psi_raw(u: np.ndarray, v: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    omega = _vertex_curl(u, v, grid)
    wx = omega * _vertex_v_avg(v, grid)
    wy = omega * _vertex_u_avg(u, grid)
    psi_x = -_edge_from_vertex_x(wx, grid)
    psi_y = _edge_from_vertex_y(wy, grid)
    return psi_x, psi_y


def psi_op(w: StaggeredVectorField) -> StaggeredVectorField:
    """Rotational advection operator: the edge field of (curl w) x w.

    Edge realization of the Lie derivative of the field's own one-form;
    vertex curl times the averaged transverse velocity, averaged to the
    edge endpoints.
    """
    px, py = _psi_raw(w.u, w.v, w.grid)
    return StaggeredVectorField(w.grid, px, py)


def _phi_raw(
    au: np.ndarray, av: np.ndarray, cu: np.ndarray, cv: np.ndarray, grid: GridSpec
) -> tuple[np.ndarray, np.ndarray]:
    # Vertex EMF-like quantity u*q - p*v; its graph-gradient rotated onto
    # edges has identically zero cell divergence.
    phi = _vertex_u_avg(au, grid) * _vertex_v_avg(cv, grid) - _vertex_u_avg(cu, grid) * _vertex_v_avg(av, grid)
    return -_ddy_vertex_to_uedge(phi, grid), _ddx_vertex_to_vedge(phi, grid)


def phi_op(adv: StaggeredVectorField, carried: StaggeredVectorField, div_tol: float = 1e-10) -> StaggeredVectorField:
    """Lie transport of an edge field by a divergence-free advecting field."""
    if adv.grid != carried.grid:
        raise ShapeMismatch("advecting and carried fields live on different grids")
    for name, f in (("advecting", adv), ("carried", carried)):
        dmax = np.abs(divergence_cell(f).values).max()
        if dmax > div_tol:
            raise ConstraintViolated(f"{name} field divergence {dmax:.3e} exceeds {div_tol:.1e}")
    fx, fy = _phi_raw(adv.u, adv.v, carried.u, carried.v, adv.grid)
    return StaggeredVectorField(adv.grid, fx, fy)


def _lambda_raw(beta: np.ndarray, alpha: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    eps = grid.eps
    if grid.periodic:
        a_l, b_l = np.roll(alpha, 1, axis=0), np.roll(beta, 1, axis=0)
        lam_x = 0.5 * (0.5 * (alpha + a_l) * (beta - b_l) - 0.5 * (beta + b_l) * (alpha - a_l)) / eps
        a_d, b_d = np.roll(alpha, 1, axis=1), np.roll(beta, 1, axis=1)
        lam_y = 0.5 * (0.5 * (alpha + a_d) * (beta - b_d) - 0.5 * (beta + b_d) * (alpha - a_d)) / eps
        return lam_x, lam_y
    lam_x = np.zeros(grid.u_shape)
    lam_x[1:-1, :] = 0.5 * (
        0.5 * (alpha[1:, :] + alpha[:-1, :]) * (beta[1:, :] - beta[:-1, :])
        - 0.5 * (beta[1:, :] + beta[:-1, :]) * (alpha[1:, :] - alpha[:-1, :])
    ) / eps
    lam_y = np.zeros(grid.v_shape)
    lam_y[:, 1:-1] = 0.5 * (
        0.5 * (alpha[:, 1:] + alpha[:, :-1]) * (beta[:, 1:] - beta[:, :-1])
        - 0.5 * (beta[:, 1:] + beta[:, :-1]) * (alpha[:, 1:] - alpha[:, :-1])
    ) / eps
    return lam_x, lam_y


def lambda_op(beta: CellField, alpha: CellField) -> StaggeredVectorField:
    """Edge field (alpha d(beta) - beta d(alpha)) / 2 with cell-pair averages.

    Antisymmetric in its arguments; the diamond forcing of scalar
    advection in the complex-fluid momentum equations.
    """
    if beta.grid != alpha.grid:
        raise ShapeMismatch("beta and alpha live on different grids")
    lx, ly = _lambda_raw(beta.values, alpha.values, beta.grid)
    return StaggeredVectorField(beta.grid, lx, ly)


def laplacian_cell(alpha: CellField) -> CellField:
    """Five-point Laplacian; walls use mirror ghosts (zero normal gradient)."""
    g = alpha.grid
    a = alpha.values
    if g.periodic:
        lap = (
            np.roll(a, 1, 0) + np.roll(a, -1, 0) + np.roll(a, 1, 1) + np.roll(a, -1, 1) - 4 * a
        ) / g.eps**2
    else:
        pad = np.pad(a, 1, mode="edge")
        lap = (pad[:-2, 1:-1] + pad[2:, 1:-1] + pad[1:-1, :-2] + pad[1:-1, 2:] - 4 * a) / g.eps**2
    return CellField(g, lap)


def grad_edges(p: CellField) -> StaggeredVectorField:
    """Cell-difference gradient on edges; zero across walls (mirror ghosts)."""
    g = p.grid
    vals = p.values
    if g.periodic:
        gx = (vals - np.roll(vals, 1, axis=0)) / g.eps
        gy = (vals - np.roll(vals, 1, axis=1)) / g.eps
    else:
        gx = np.zeros(g.u_shape)
        gx[1:-1, :] = (vals[1:, :] - vals[:-1, :]) / g.eps
        gy = np.zeros(g.v_shape)
        gy[:, 1:-1] = (vals[:, 1:] - vals[:, :-1]) / g.eps
    return StaggeredVectorField(g, gx, gy)


def from_stream_function(psi: VertexField) -> StaggeredVectorField:
    """u = d(psi)/dy, v = -d(psi)/dx on edges; exactly divergence-free."""
    g = psi.grid
    u = _ddy_vertex_to_uedge(psi.values, g)
    v = -_ddx_vertex_to_vedge(psi.values, g)
    return StaggeredVectorField(g, u, v)


def from_vector_potential(a: VertexField) -> StaggeredVectorField:
    """B_x = dA/dy, B_y = -dA/dx: same stencil as the stream function."""
    return from_stream_function(a)


def project_divergence_free(w: StaggeredVectorField, tol: float = 1e-10) -> StaggeredVectorField:
    """Helmholtz projection onto divergence-free fields.

    Wall-normal edges are zeroed first (hard constraint), then the cell
    divergence is removed with a Poisson solve.  Idempotent to solver
    tolerance.
    """
    from .timestepper import poisson_solve  # local import: avoids cycle

    g = w.grid
    u, v = w.u.copy(), w.v.copy()
    if not g.periodic:
        u[0, :] = u[-1, :] = 0.0
        v[:, 0] = v[:, -1] = 0.0
    w0 = StaggeredVectorField(g, u, v)
    div = divergence_cell(w0)
    phi = poisson_solve(div, g)
    out = w0 - grad_edges(phi)
    dmax = np.abs(divergence_cell(out).values).max()
    if dmax > tol:
        from .errors import PoissonNoConvergence

        raise PoissonNoConvergence(f"projection left divergence {dmax:.3e}", residual=dmax)
    return out
