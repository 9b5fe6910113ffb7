"""Benchmark presets and run configuration.

Each preset reproduces its published setup verbatim: domain, resolution,
time step, time span, boundary conditions, and initial-condition
formulas.  Analytic initial fields that violate the discrete constraints
(nonzero divergence or wall-normal flow) are repaired with the Helmholtz
projection before use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, UnknownPreset
from .finite_dim import HeavyTopState, RigidBodyState
from .grid import (
    CellField,
    GridSpec,
    StaggeredVectorField,
    VertexField,
    from_stream_function,
    from_vector_potential,
    project_divergence_free,
)
from .models import FluidState, MhdState, MicrostretchState, NematicState
from .timestepper import SolverConfig

__all__ = ["RunConfig", "PRESET_NAMES", "load_preset", "build_initial_state", "grid_of"]

PRESET_NAMES = (
    "mhd-vortex",
    "reconnection",
    "field-loop",
    "rotor",
    "orszag-tang",
    "nematic-disk",
    "microstretch-disk",
    "rigid-body",
    "heavy-top",
)

_MODELS = ("fluid", "mhd", "nematic", "microstretch", "rigid-body", "heavy-top")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one simulation run."""

    model: str
    ic: str
    nx: int
    ny: int
    x0: float
    x1: float
    y0: float
    y1: float
    boundary: str
    h: float
    t_end: float
    steps_per_snapshot: int = 20
    solver: SolverConfig = field(default_factory=SolverConfig)
    params: dict = field(default_factory=dict)
    out_dir: str = ""

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.t_end <= 0 or self.h <= 0:
            raise ConfigError("t_end and h must be positive")
        if self.steps_per_snapshot < 1:
            raise ConfigError("snapshot cadence must be >= 1")
        if self.model not in ("rigid-body", "heavy-top"):
            ex = (self.x1 - self.x0) / self.nx
            ey = (self.y1 - self.y0) / self.ny
            if abs(ex - ey) > 1e-12 * max(abs(ex), abs(ey)):
                raise ConfigError(f"cells must be square (eps_x={ex}, eps_y={ey})")
            if ex <= 0:
                raise ConfigError("domain extents must be increasing")

    @property
    def eps(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def n_steps(self) -> int:
        n = round(self.t_end / self.h)
        if abs(n * self.h - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ConfigError(f"t_end={self.t_end} is not an integer number of steps of h={self.h}")
        return n


def grid_of(config: RunConfig) -> GridSpec:
    return GridSpec(config.nx, config.ny, config.eps, config.boundary)


_PRESETS: dict[str, RunConfig] = {
    "mhd-vortex": RunConfig(
        model="mhd", ic="mhd-vortex", nx=20, ny=24, x0=0.0, x1=10.0, y0=0.0, y1=12.0,
        boundary="no-normal-flow", h=0.5, t_end=80.0,
        params={"x_c": 3.0, "y_c": 5.5, "u0": 0.5, "beta": 5.0, "gamma": 1.4},
    ),
    "reconnection": RunConfig(
        model="mhd", ic="reconnection", nx=30, ny=30, x0=0.0, x1=2.0, y0=0.0, y1=2.0,
        boundary="periodic", h=0.1, t_end=8.0,
        # theta is published with the setup but unused by these formulas.
        params={"x1": 0.5, "x2": 1.5, "u0": 0.1, "B0": 1.0, "theta": math.atan(0.5)},
    ),
    "field-loop": RunConfig(
        model="mhd", ic="field-loop", nx=128, ny=64, x0=-1.0, x1=1.0, y0=-0.5, y1=0.5,
        boundary="periodic", h=0.01, t_end=2.0,
        params={"v0": math.sqrt(5.0), "A0": 1e-3, "R": 0.3, "theta": math.atan(0.5)},
    ),
    "rotor": RunConfig(
        model="mhd", ic="rotor", nx=30, ny=30, x0=0.0, x1=1.0, y0=0.0, y1=1.0,
        boundary="periodic", h=0.003, t_end=0.36,
        params={"u0": 2.0, "r0": 0.1, "r1": 0.115, "theta": math.atan(0.5)},
    ),
    "orszag-tang": RunConfig(
        model="mhd", ic="orszag-tang", nx=64, ny=64, x0=0.0, x1=2 * math.pi, y0=0.0, y1=2 * math.pi,
        boundary="periodic", h=0.01, t_end=0.75, params={},
    ),
    "nematic-disk": RunConfig(
        model="nematic", ic="nematic-disk", nx=10, ny=10, x0=0.0, x1=10.0, y0=0.0, y1=10.0,
        boundary="no-normal-flow", h=0.4, t_end=50.0,
        params={"omega0": 1.0, "r_disk": 2.5},
    ),
    "microstretch-disk": RunConfig(
        model="microstretch", ic="microstretch-disk", nx=10, ny=10, x0=0.0, x1=10.0, y0=0.0, y1=10.0,
        boundary="no-normal-flow", h=0.4, t_end=50.0,
        params={"omega0": 1.0, "r_disk": 2.5},
    ),
    "rigid-body": RunConfig(
        model="rigid-body", ic="rigid-body", nx=3, ny=3, x0=0.0, x1=1.0, y0=0.0, y1=1.0,
        boundary="periodic", h=0.01, t_end=100.0,
        params={"I1": 1.0, "I2": 2.0, "I3": 3.0, "w1": 1.0, "w2": 0.1, "w3": 0.1},
    ),
    "heavy-top": RunConfig(
        model="heavy-top", ic="heavy-top", nx=3, ny=3, x0=0.0, x1=1.0, y0=0.0, y1=1.0,
        boundary="periodic", h=0.01, t_end=100.0,
        params={"I1": 1.0, "I2": 1.0, "I3": 2.0, "mass": 1.0, "gravity": 1.0, "length": 1.0,
                "tilt": 0.3, "spin": 5.0},
    ),
}


def load_preset(name: str, **overrides) -> RunConfig:
    """Published configuration for a benchmark preset.

    Keyword overrides (nx, ny, h, t_end, ...) derive scaled variants; the
    initial-condition formulas are resolution independent.
    """
    if name not in _PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; know {', '.join(PRESET_NAMES)}")
    config = _PRESETS[name]
    return replace(config, **overrides) if overrides else config


# ---------------------------------------------------------------------------
# Coordinates of the staggered sample points
# ---------------------------------------------------------------------------


def _u_points(config: RunConfig, grid: GridSpec):
    xs = config.x0 + config.eps * np.arange(grid.u_shape[0])
    ys = config.y0 + config.eps * (np.arange(grid.ny) + 0.5)
    return np.meshgrid(xs, ys, indexing="ij")


def _v_points(config: RunConfig, grid: GridSpec):
    xs = config.x0 + config.eps * (np.arange(grid.nx) + 0.5)
    ys = config.y0 + config.eps * np.arange(grid.v_shape[1])
    return np.meshgrid(xs, ys, indexing="ij")


def _cell_points(config: RunConfig, grid: GridSpec):
    xs = config.x0 + config.eps * (np.arange(grid.nx) + 0.5)
    ys = config.y0 + config.eps * (np.arange(grid.ny) + 0.5)
    return np.meshgrid(xs, ys, indexing="ij")


def _vertex_points(config: RunConfig, grid: GridSpec):
    xs = config.x0 + config.eps * np.arange(grid.vertex_shape[0])
    ys = config.y0 + config.eps * np.arange(grid.vertex_shape[1])
    return np.meshgrid(xs, ys, indexing="ij")


def _sample_edges(config: RunConfig, grid: GridSpec, fu, fv) -> StaggeredVectorField:
    xu, yu = _u_points(config, grid)
    xv, yv = _v_points(config, grid)
    return StaggeredVectorField(grid, fu(xu, yu), fv(xv, yv))


# ---------------------------------------------------------------------------
# Initial states
# ---------------------------------------------------------------------------


def build_initial_state(config: RunConfig):
    """Construct the initial state for a RunConfig (projecting as needed)."""
    builder = _IC_BUILDERS.get(config.ic)
    if builder is None:
        raise UnknownPreset(f"unknown initial condition {config.ic!r}")
    return builder(config)


def _ic_mhd_vortex(config: RunConfig) -> MhdState:
    g = grid_of(config)
    p = config.params
    xc, yc, u0, beta = p["x_c"], p["y_c"], p["u0"], p["beta"]

    def blob(x, y):
        return np.exp(0.5 * (1.0 - ((x - xc) ** 2 + (y - yc) ** 2)))

    lx, ly = config.x1 - config.x0, config.y1 - config.y0
    fu = lambda x, y: u0 + beta / (2 * math.pi) * blob(x, y) * (y - yc)
    fv = lambda x, y: -beta / (2 * math.pi) * blob(x, y) * (x - xc)
    fbx = lambda x, y: -np.sin(math.pi * x / lx) * np.cos(math.pi * y / ly)
    fby = lambda x, y: np.cos(math.pi * x / lx) * np.sin(math.pi * y / ly)
    vel = project_divergence_free(_sample_edges(config, g, fu, fv))
    b = project_divergence_free(_sample_edges(config, g, fbx, fby))
    return MhdState(vel=vel, p=CellField.zeros(g), b=b)


def _ic_reconnection(config: RunConfig) -> MhdState:
    g = grid_of(config)
    p = config.params
    fu = lambda x, y: p["u0"] * np.sin(math.pi * y)
    fv = lambda x, y: np.zeros_like(x)
    fbx = lambda x, y: np.zeros_like(x)
    fby = lambda x, y: np.where((x >= p["x1"]) & (x <= p["x2"]), -p["B0"], p["B0"])
    vel = _sample_edges(config, g, fu, fv)
    b = _sample_edges(config, g, fbx, fby)
    return MhdState(vel=vel, p=CellField.zeros(g), b=b)


def _ic_field_loop(config: RunConfig) -> MhdState:
    g = grid_of(config)
    p = config.params
    ux, uy = p["v0"] * math.cos(p["theta"]), p["v0"] * math.sin(p["theta"])
    vel = _sample_edges(config, g, lambda x, y: np.full_like(x, ux), lambda x, y: np.full_like(x, uy))
    xg, yg = _vertex_points(config, g)
    # A vanishes outside the loop so B does too
    a = p["A0"] * np.maximum(p["R"] - np.hypot(xg, yg), 0.0)
    b = from_vector_potential(VertexField(g, a))
    return MhdState(vel=vel, p=CellField.zeros(g), b=b)


def _ic_rotor(config: RunConfig) -> MhdState:
    g = grid_of(config)
    p = config.params
    u0, r0, r1 = p["u0"], p["r0"], p["r1"]

    def taper(r):
        f = np.clip((r1 - r) / (r1 - r0), 0.0, None)
        return np.where(r < r0, 1.0, np.where(r <= r1, f, 0.0))

    def fu(x, y):
        r = np.hypot(x - 0.5, y - 0.5)
        denom = np.where(r < r0, r0, np.maximum(r, 1e-30))
        return np.where(r <= r1, -u0 * taper(r) * (y - 0.5) / denom, 0.0)

    def fv(x, y):
        r = np.hypot(x - 0.5, y - 0.5)
        denom = np.where(r < r0, r0, np.maximum(r, 1e-30))
        return np.where(r <= r1, u0 * taper(r) * (x - 0.5) / denom, 0.0)

    vel = project_divergence_free(_sample_edges(config, g, fu, fv))
    b0 = 5.0 / math.sqrt(4 * math.pi)
    b = _sample_edges(config, g, lambda x, y: np.full_like(x, b0), lambda x, y: np.zeros_like(x))
    return MhdState(vel=vel, p=CellField.zeros(g), b=b)


def _ic_orszag_tang(config: RunConfig) -> MhdState:
    g = grid_of(config)
    xg, yg = _vertex_points(config, g)
    psi = 2 * np.sin(yg) - 2 * np.cos(xg)
    a = np.cos(2 * yg) - 2 * np.cos(xg)
    vel = from_stream_function(VertexField(g, psi))
    b = from_vector_potential(VertexField(g, a))
    return MhdState(vel=vel, p=CellField.zeros(g), b=b)


def _disk_flow(config: RunConfig) -> tuple[StaggeredVectorField, CellField]:
    g = grid_of(config)
    lx = config.x1 - config.x0
    xg, yg = _vertex_points(config, g)
    psi = np.sin(math.pi * xg / lx) * np.sin(math.pi * yg / lx)
    vel = from_stream_function(VertexField(g, psi))
    xc, yc = _cell_points(config, g)
    r = np.hypot(xc - 0.5 * (config.x0 + config.x1), yc - 0.5 * (config.y0 + config.y1))
    omega = CellField(g, np.where(r < config.params["r_disk"], config.params["omega0"], 0.0))
    return vel, omega


def _ic_nematic_disk(config: RunConfig) -> NematicState:
    g = grid_of(config)
    vel, omega = _disk_flow(config)
    return NematicState(vel=vel, p=CellField.zeros(g), omega=omega, alpha=CellField.zeros(g))


def _ic_microstretch_disk(config: RunConfig) -> MicrostretchState:
    g = grid_of(config)
    vel, omega = _disk_flow(config)
    zero = CellField.zeros(g)
    return MicrostretchState(
        vel=vel, p=zero, omega=omega, stretch=zero, alpha=zero, lam=zero, j_r=zero, j_s=zero
    )


def _ic_rigid_body(config: RunConfig) -> RigidBodyState:
    p = config.params
    return RigidBodyState(
        rotation=np.eye(3),
        omega=np.array([p["w1"], p["w2"], p["w3"]]),
        inertia=np.array([p["I1"], p["I2"], p["I3"]]),
    )


def _ic_heavy_top(config: RunConfig) -> HeavyTopState:
    p = config.params
    t = p["tilt"]
    rot = np.array([[1.0, 0.0, 0.0], [0.0, math.cos(t), -math.sin(t)], [0.0, math.sin(t), math.cos(t)]])
    return HeavyTopState(
        rotation=rot,
        omega=np.array([0.0, 0.0, p["spin"]]),
        inertia=np.array([p["I1"], p["I2"], p["I3"]]),
        gamma=rot.T @ np.array([0.0, 0.0, 1.0]),
        mass=p["mass"],
        gravity=p["gravity"],
        length=p["length"],
        chi=np.array([0.0, 0.0, 1.0]),
    )


def _ic_zero(config: RunConfig):
    g = grid_of(config)
    vel = StaggeredVectorField.zeros(g)
    p = CellField.zeros(g)
    if config.model == "mhd":
        return MhdState(vel=vel, p=p, b=StaggeredVectorField.zeros(g))
    if config.model == "nematic":
        return NematicState(vel=vel, p=p, omega=CellField.zeros(g), alpha=CellField.zeros(g))
    if config.model == "microstretch":
        z = CellField.zeros(g)
        return MicrostretchState(vel=vel, p=p, omega=z, stretch=z, alpha=z, lam=z, j_r=z, j_s=z)
    return FluidState(vel=vel, p=p)


def _ic_taylor_green(config: RunConfig) -> FluidState:
    g = grid_of(config)
    xg, yg = _vertex_points(config, g)
    psi = np.sin(xg) * np.sin(yg)
    return FluidState(vel=from_stream_function(VertexField(g, psi)), p=CellField.zeros(g))


_IC_BUILDERS = {
    "mhd-vortex": _ic_mhd_vortex,
    "reconnection": _ic_reconnection,
    "field-loop": _ic_field_loop,
    "rotor": _ic_rotor,
    "orszag-tang": _ic_orszag_tang,
    "nematic-disk": _ic_nematic_disk,
    "microstretch-disk": _ic_microstretch_disk,
    "rigid-body": _ic_rigid_body,
    "heavy-top": _ic_heavy_top,
    "zero": _ic_zero,
    "taylor-green": _ic_taylor_green,
}
