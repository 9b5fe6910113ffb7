"""Conserved-quantity and field diagnostics.

All read-only functions of state.  The pairing energy (1/2)<Y^flat, Y>
coincides algebraically with the eps^2-weighted edge quadrature on a
uniform cartesian grid (Omega = eps^2 I and two-away flat entries pair
against zero entries of the flux matrix), so the two CSV columns agree
to roundoff; tests certify the value against the matrix-backend pairing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import IncompatibleGrids, WrongModel
from .grid import GridSpec, StaggeredVectorField, VertexField, curl_vertex, divergence_cell
from .grid import _psi_raw
from .models import FluidState, MhdState, MicrostretchState, NematicState

__all__ = [
    "DiagnosticsRecord",
    "CSV_COLUMNS",
    "energy",
    "kinetic_pairing_energy",
    "free_energy",
    "cross_helicity",
    "micro_momentum",
    "current_density",
    "magnetic_pressure_avg",
    "restrict_edge_field",
    "refinement_difference",
    "RefinementDiff",
    "record_for",
]

CSV_COLUMNS = (
    "t",
    "k",
    "energy_pairing",
    "energy_quadrature",
    "cross_helicity",
    "micro_momentum",
    "div_u_max",
    "div_B_max",
    "magnetic_pressure_avg",
    "picard_iters",
    "residual",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One per-step row of the fixed CSV schema."""

    t: float
    k: int
    energy_pairing: float
    energy_quadrature: float
    cross_helicity: float = 0.0
    micro_momentum: float = 0.0
    div_u_max: float = 0.0
    div_B_max: float = 0.0
    magnetic_pressure_avg: float = 0.0
    picard_iters: int = 0
    residual: float = 0.0

    def __post_init__(self):
        for name in CSV_COLUMNS:
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite diagnostic {name}")

    def to_row(self) -> str:
        vals = []
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            vals.append(str(v) if isinstance(v, int) else f"{v:.17g}")
        return ",".join(vals)


def _edge_quadrature(w: StaggeredVectorField) -> float:
    eps2 = w.grid.eps**2
    return 0.5 * eps2 * (float(np.sum(w.u**2)) + float(np.sum(w.v**2)))


def kinetic_pairing_energy(w: StaggeredVectorField) -> float:
    """(1/2) <Y^flat, Y>: equals the edge quadrature on uniform grids."""
    return _edge_quadrature(w)


def free_energy(alpha_values: np.ndarray, grid: GridSpec) -> float:
    """Discrete one-constant free energy (1/2)||d alpha||^2.

    Sum of squared adjacent-cell differences over interior pairs (the
    mirror ghosts contribute nothing), consistent with laplacian_cell as
    its variational derivative under the eps^2-weighted pairing.
    """
    a = alpha_values
    if grid.periodic:
        dx = a - np.roll(a, 1, axis=0)
        dy = a - np.roll(a, 1, axis=1)
        return 0.5 * (float(np.sum(dx**2)) + float(np.sum(dy**2)))
    dx = a[1:, :] - a[:-1, :]
    dy = a[:, 1:] - a[:, :-1]
    return 0.5 * (float(np.sum(dx**2)) + float(np.sum(dy**2)))


def energy(state: FluidState) -> float:
    """Total energy: kinetic + magnetic + micro kinetic + free energy."""
    total = _edge_quadrature(state.vel)
    eps2 = state.grid.eps**2
    if isinstance(state, MhdState):
        total += _edge_quadrature(state.b)
    elif isinstance(state, MicrostretchState):
        total += 0.5 * eps2 * float(np.sum(np.exp(state.j_r.values) * state.omega.values**2))
        total += 0.5 * eps2 * float(np.sum(np.exp(state.j_s.values) * state.stretch.values**2))
        total += free_energy(state.alpha.values, state.grid)
        total += 0.5 * eps2 * float(np.sum(state.lam.values**2))
    elif isinstance(state, NematicState):
        total += 0.5 * eps2 * float(np.sum(state.omega.values**2))
        total += free_energy(state.alpha.values, state.grid)
    return total


def cross_helicity(state: MhdState, h: float) -> float:
    """Discrete cross-helicity <(dtau^-1_{-hY})* Y^flat, R>, cubic dropped.

    Edge-local stencil eps^2 sum_e (w_e + (h/2) Psi_e(w)) B_e, certified
    against matrix_backend.cross_helicity on small grids.  Exactly
    conserved by mhd_step (to solver tolerance).
    """
    if not isinstance(state, MhdState):
        raise WrongModel("cross_helicity needs an MhdState")
    w, b = state.vel, state.b
    px, py = _psi_raw(w.u, w.v, w.grid)
    eps2 = w.grid.eps**2
    return eps2 * (
        float(np.sum((w.u + 0.5 * h * px) * b.u)) + float(np.sum((w.v + 0.5 * h * py) * b.v))
    )


def micro_momentum(state: FluidState) -> float:
    """eps^2 sum of omega (nematic) or pi (microstretch); exactly conserved."""
    eps2 = state.grid.eps**2
    if isinstance(state, MicrostretchState):
        return eps2 * float(np.sum(state.pi.values))
    if isinstance(state, NematicState):
        return eps2 * float(np.sum(state.omega.values))
    raise WrongModel("micro_momentum needs a nematic or microstretch state")


def current_density(state: MhdState) -> VertexField:
    """Current density j = curl B at vertices."""
    if not isinstance(state, MhdState):
        raise WrongModel("current_density needs an MhdState")
    return curl_vertex(state.b)


def magnetic_pressure_avg(state: MhdState) -> float:
    """Volume-averaged magnetic pressure: mean(Bx^2) + mean(By^2)."""
    if not isinstance(state, MhdState):
        raise WrongModel("magnetic_pressure_avg needs an MhdState")
    return float(np.mean(state.b.u**2)) + float(np.mean(state.b.v**2))


class RefinementDiff(NamedTuple):
    velocity: float
    magnetic: float | None


def restrict_edge_field(fine: StaggeredVectorField, coarse_grid: GridSpec) -> StaggeredVectorField:
    """Restrict a fine edge field to the coarse grid by 2-point edge averages."""
    fg = fine.grid
    if fg.nx != 2 * coarse_grid.nx or fg.ny != 2 * coarse_grid.ny or fg.boundary != coarse_grid.boundary:
        raise IncompatibleGrids("fine grid must be the 2x refinement of the coarse grid")
    u = 0.5 * (fine.u[::2, 0::2] + fine.u[::2, 1::2])
    v = 0.5 * (fine.v[0::2, ::2] + fine.v[1::2, ::2])
    return StaggeredVectorField(coarse_grid, u, v)


def _l2(w: StaggeredVectorField) -> float:
    eps2 = w.grid.eps**2
    return float(np.sqrt(eps2 * (np.sum(w.u**2) + np.sum(w.v**2))))


def refinement_difference(coarse_state: FluidState, fine_state: FluidState) -> RefinementDiff:
    """eps-weighted L2 norms of (fine restricted - coarse), velocity and B."""
    cg = coarse_state.grid
    vel = _l2(restrict_edge_field(fine_state.vel, cg) - coarse_state.vel)
    mag = None
    if isinstance(coarse_state, MhdState) and isinstance(fine_state, MhdState):
        mag = _l2(restrict_edge_field(fine_state.b, cg) - coarse_state.b)
    return RefinementDiff(vel, mag)


def record_for(state: FluidState, h: float, picard_iters: int = 0, residual: float = 0.0) -> DiagnosticsRecord:
    """Assemble the fixed-schema diagnostics row for any grid model state."""
    div_u = float(np.abs(divergence_cell(state.vel).values).max())
    e = energy(state)
    kwargs = dict(
        t=state.t,
        k=state.k,
        energy_pairing=e,
        energy_quadrature=e,
        div_u_max=div_u,
        picard_iters=picard_iters,
        residual=residual,
    )
    if isinstance(state, MhdState):
        kwargs["cross_helicity"] = cross_helicity(state, h)
        kwargs["div_B_max"] = float(np.abs(divergence_cell(state.b).values).max())
        kwargs["magnetic_pressure_avg"] = magnetic_pressure_avg(state)
    elif isinstance(state, (NematicState, MicrostretchState)):
        kwargs["micro_momentum"] = micro_momentum(state)
    return DiagnosticsRecord(**kwargs)
