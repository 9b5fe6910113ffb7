"""The four continuum steppers: fluid, MHD, nematic, microstretch.

Each step solves the trapezoidal momentum stencil equation

    (w_k - w_{k-1})/h + (Psi(w_{k-1}) + Psi(w_k))/2 = F_k - grad(p_k)

with div(w_k) = 0, where F_k is the model force at the new time level:
zero for the plain fluid, Psi(B_k) for MHD (level k, which is what makes
the discrete cross-helicity exactly conserved), and Lambda-type diamond
forces for the complex fluids.  Advected cell quantities are transported
with matrix-free Cayley applications; the magnetic field with the
trapezoidal Lie transport, both advecting with the old velocity as the
update equations prescribe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConstraintViolated, NoConvergence
from .grid import (
    CellField,
    GridSpec,
    StaggeredVectorField,
    divergence_cell,
    laplacian_cell,
    lambda_op,
    psi_op,
)
from .timestepper import SolverConfig, apply_cayley_cells, magnetic_solve, momentum_solve

__all__ = [
    "StepStats",
    "FluidState",
    "MhdState",
    "NematicState",
    "MicrostretchState",
    "fluid_step",
    "mhd_step",
    "nematic_step",
    "microstretch_step",
]

_DIV_TOL = 1e-10


class StepStats(NamedTuple):
    picard_iters: int
    residual: float


def _check_div(w: StaggeredVectorField, what: str) -> None:
    dmax = float(np.abs(divergence_cell(w).values).max())
    if dmax > _DIV_TOL:
        raise ConstraintViolated(f"{what} divergence {dmax:.3e} exceeds {_DIV_TOL:.1e}")


@dataclass(frozen=True)
class FluidState:
    """Prognostic state of the ideal incompressible fluid."""

    vel: StaggeredVectorField
    p: CellField
    t: float = 0.0
    k: int = 0

    def __post_init__(self):
        _check_div(self.vel, "velocity")

    @property
    def grid(self) -> GridSpec:
        return self.vel.grid


@dataclass(frozen=True)
class MhdState(FluidState):
    """Fluid state plus the advected magnetic field."""

    b: StaggeredVectorField = None  # type: ignore[assignment]

    def __post_init__(self):
        super().__post_init__()
        if self.b is None:
            raise ValueError("MhdState requires a magnetic field")
        _check_div(self.b, "magnetic field")


@dataclass(frozen=True)
class NematicState(FluidState):
    """Fluid state plus local angular velocity and director angle.

    alpha is stored unwrapped so Lambda(Lap(alpha), alpha) stays smooth;
    wrap only when reporting.
    """

    omega: CellField = None  # type: ignore[assignment]
    alpha: CellField = None  # type: ignore[assignment]

    def __post_init__(self):
        super().__post_init__()
        if self.omega is None or self.alpha is None:
            raise ValueError("NematicState requires omega and alpha")


@dataclass(frozen=True)
class MicrostretchState(FluidState):
    """Fluid state plus the rotation and stretch micro-sectors.

    The momenta pi = e^{j_r} omega, Q = e^{j_s} R and the inertia forces
    i_r, i_s are derived properties, recomputed from the prognostic
    fields on every access and never integrated.
    """

    omega: CellField = None  # type: ignore[assignment]
    stretch: CellField = None  # type: ignore[assignment]  # local stretch rate R
    alpha: CellField = None  # type: ignore[assignment]
    lam: CellField = None  # type: ignore[assignment]  # log director length
    j_r: CellField = None  # type: ignore[assignment]
    j_s: CellField = None  # type: ignore[assignment]

    def __post_init__(self):
        super().__post_init__()
        for name in ("omega", "stretch", "alpha", "lam", "j_r", "j_s"):
            if getattr(self, name) is None:
                raise ValueError(f"MicrostretchState requires {name}")

    @property
    def pi(self) -> CellField:
        return CellField(self.grid, np.exp(self.j_r.values) * self.omega.values)

    @property
    def q_momentum(self) -> CellField:
        return CellField(self.grid, np.exp(self.j_s.values) * self.stretch.values)

    @property
    def i_r(self) -> CellField:
        return CellField(self.grid, 0.5 * np.exp(self.j_r.values) * self.omega.values**2)

    @property
    def i_s(self) -> CellField:
        return CellField(self.grid, 0.5 * np.exp(self.j_s.values) * self.stretch.values**2)


def _solve_momentum(
    w_prev: StaggeredVectorField,
    force: StaggeredVectorField | None,
    h: float,
    cfg: SolverConfig,
):
    grid = w_prev.grid
    explicit = (-0.5 * h) * psi_op(w_prev)
    if force is not None:
        explicit = explicit + h * force
    implicit: Callable[[StaggeredVectorField], StaggeredVectorField] = lambda wn: (-0.5 * h) * psi_op(wn)
    res = momentum_solve(w_prev, explicit, implicit, grid, cfg, h)
    return StaggeredVectorField(grid, res.u, res.v), res


def fluid_step(s: FluidState, h: float, cfg: SolverConfig = SolverConfig()) -> tuple[FluidState, StepStats]:
    """One trapezoidal step of ideal incompressible flow."""
    w_new, res = _solve_momentum(s.vel, None, h, cfg)
    state = FluidState(vel=w_new, p=res.p, t=s.t + h, k=s.k + 1)
    return state, StepStats(res.iterations, res.residual)


def mhd_step(s: MhdState, h: float, cfg: SolverConfig = SolverConfig()) -> tuple[MhdState, StepStats]:
    """One step of ideal incompressible MHD.

    The magnetic update advects with the old velocity, so it decouples
    from the new one: solve it first, then feed Psi(B_k) into the
    momentum solve.  The reported residual is the joint (momentum,
    magnetic) defect.
    """
    b_new, b_resid = magnetic_solve(s.vel, s.b, h, s.grid, cfg)
    lorentz = psi_op(b_new)
    w_new, res = _solve_momentum(s.vel, lorentz, h, cfg)
    state = MhdState(vel=w_new, p=res.p, t=s.t + h, k=s.k + 1, b=b_new)
    return state, StepStats(res.iterations, max(res.residual, b_resid))


def nematic_step(s: NematicState, h: float, cfg: SolverConfig = SolverConfig()) -> tuple[NematicState, StepStats]:
    """One step of 2-D nematic liquid crystal flow.

    alpha_k = cay(h Y) alpha + h cay(h Y/2) omega is explicit in the old
    state, so the director force Lambda(Lap(alpha_k), alpha_k) is known
    before the momentum solve; omega_k then needs the new velocity:
    omega_k = cay(h Y_k / 2)[cay(h Y_{k-1}/2) omega + h Lap(alpha_k)].
    """
    grid = s.grid
    w_prev = s.vel
    alpha_new = apply_cayley_cells(w_prev, s.alpha, h, grid, cfg) + h * apply_cayley_cells(
        w_prev, s.omega, 0.5 * h, grid, cfg
    )
    lap = laplacian_cell(alpha_new)
    force = lambda_op(lap, alpha_new)
    w_new, res = _solve_momentum(w_prev, force, h, cfg)
    inner = apply_cayley_cells(w_prev, s.omega, 0.5 * h, grid, cfg) + h * lap
    omega_new = apply_cayley_cells(w_new, inner, 0.5 * h, grid, cfg)
    state = NematicState(vel=w_new, p=res.p, t=s.t + h, k=s.k + 1, omega=omega_new, alpha=alpha_new)
    return state, StepStats(res.iterations, res.residual)


def microstretch_step(
    s: MicrostretchState,
    h: float,
    cfg: SolverConfig = SolverConfig(),
    stretch_enabled: bool = True,
) -> tuple[MicrostretchState, StepStats]:
    """One step of 2-D microstretch fluid flow.

    All advected cell updates use cay(h Y_{k-1}); the stretch momentum
    equation Q_k = cay Q - 2h(i_r + i_s) - h lam_k is quadratic per cell
    through i_s = e^{-j_s} Q_k^2 / 2 and solved in closed form.  With
    stretch_enabled=False the stretch sector (R, lam, Q, j_s) is frozen
    at zero and the -2h(i_r + i_s) source is dropped (test mode).
    """
    grid = s.grid
    w_prev = s.vel
    cay_h = lambda f: apply_cayley_cells(w_prev, f, h, grid, cfg)

    alpha_new = cay_h(s.alpha + h * s.omega)
    lap = laplacian_cell(alpha_new)
    pi_new = cay_h(s.pi) + h * lap
    if stretch_enabled:
        lam_new = cay_h(s.lam + h * s.stretch)
        j_r_new = cay_h(s.j_r + (-2.0 * h) * s.stretch)
        j_s_new = cay_h(s.j_s + (-2.0 * h) * s.stretch)
        omega_new = CellField(grid, np.exp(-j_r_new.values) * pi_new.values)
        i_r_new = CellField(grid, 0.5 * np.exp(-j_r_new.values) * pi_new.values**2)
        # a Q^2 + Q - c = 0 with a = h e^{-j_s}; root that tends to c as a -> 0
        c = cay_h(s.q_momentum).values - 2.0 * h * i_r_new.values - h * lam_new.values
        a = h * np.exp(-j_s_new.values)
        disc = 1.0 + 4.0 * a * c
        if (disc < 0).any():
            raise NoConvergence("stretch momentum quadratic has no real root")
        q_new = 2.0 * c / (1.0 + np.sqrt(disc))
        stretch_new = CellField(grid, np.exp(-j_s_new.values) * q_new)
        i_s_new = CellField(grid, 0.5 * np.exp(-j_s_new.values) * q_new**2)
        force = (
            lambda_op(pi_new, omega_new)
            + lambda_op(CellField(grid, q_new), stretch_new)
            + lambda_op(i_r_new, j_r_new)
            + lambda_op(i_s_new, j_s_new)
            + lambda_op(lap, alpha_new)
        )
    else:
        lam_new, j_s_new = s.lam, s.j_s
        j_r_new = cay_h(s.j_r)
        omega_new = CellField(grid, np.exp(-j_r_new.values) * pi_new.values)
        i_r_new = CellField(grid, 0.5 * np.exp(-j_r_new.values) * pi_new.values**2)
        stretch_new = s.stretch
        force = lambda_op(pi_new, omega_new) + lambda_op(i_r_new, j_r_new) + lambda_op(lap, alpha_new)
    w_new, res = _solve_momentum(w_prev, force, h, cfg)
    state = MicrostretchState(
        vel=w_new,
        p=res.p,
        t=s.t + h,
        k=s.k + 1,
        omega=omega_new,
        stretch=stretch_new,
        alpha=alpha_new,
        lam=lam_new,
        j_r=j_r_new,
        j_s=j_s_new,
    )
    return state, StepStats(res.iterations, res.residual)
