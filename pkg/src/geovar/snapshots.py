"""Grid snapshot file format shared with the CLI and plot tooling.

Header line:  GEOVAR1 <kind> <nx> <ny> <eps> <boundary>
Payload:      per-component arrays in row-major order, either
              whitespace-separated decimal (default) or raw
              little-endian float64 (binary mode), same header.

Component order per kind (edge components first, then cell fields in
alphabetical order):

    fluid         u v p
    mhd           u v Bx By p
    nematic       u v alpha omega p
    microstretch  u v alpha j_r j_s lam omega p stretch
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import GridSpec
from .models import FluidState, MhdState, MicrostretchState, NematicState

__all__ = ["COMPONENTS", "write_snapshot", "read_snapshot", "state_components"]

MAGIC = "GEOVAR1"

COMPONENTS = {
    "fluid": ("u", "v", "p"),
    "mhd": ("u", "v", "Bx", "By", "p"),
    "nematic": ("u", "v", "alpha", "omega", "p"),
    "microstretch": ("u", "v", "alpha", "j_r", "j_s", "lam", "omega", "p", "stretch"),
}

_EDGE_COMPONENTS = ("u", "v", "Bx", "By")


def _component_shape(name: str, grid: GridSpec) -> tuple[int, int]:
    if name in ("u", "Bx"):
        return grid.u_shape
    if name in ("v", "By"):
        return grid.v_shape
    return grid.cell_shape


def state_components(state: FluidState) -> tuple[str, dict[str, np.ndarray]]:
    """Model kind and named component arrays of a grid state."""
    if isinstance(state, MhdState):
        return "mhd", {
            "u": state.vel.u, "v": state.vel.v, "Bx": state.b.u, "By": state.b.v, "p": state.p.values,
        }
    if isinstance(state, MicrostretchState):
        return "microstretch", {
            "u": state.vel.u, "v": state.vel.v, "alpha": state.alpha.values,
            "j_r": state.j_r.values, "j_s": state.j_s.values, "lam": state.lam.values,
            "omega": state.omega.values, "p": state.p.values, "stretch": state.stretch.values,
        }
    if isinstance(state, NematicState):
        return "nematic", {
            "u": state.vel.u, "v": state.vel.v, "alpha": state.alpha.values,
            "omega": state.omega.values, "p": state.p.values,
        }
    return "fluid", {"u": state.vel.u, "v": state.vel.v, "p": state.p.values}


def write_snapshot(path: str | Path, state: FluidState, binary: bool = False) -> None:
    kind, comps = state_components(state)
    grid = state.grid
    header = f"{MAGIC} {kind} {grid.nx} {grid.ny} {grid.eps:.17g} {grid.boundary}\n"
    path = Path(path)
    if binary:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            for name in COMPONENTS[kind]:
                fh.write(np.ascontiguousarray(comps[name], dtype="<f8").tobytes())
    else:
        with open(path, "w") as fh:
            fh.write(header)
            for name in COMPONENTS[kind]:
                flat = comps[name].ravel()
                fh.write(" ".join(f"{x:.17g}" for x in flat))
                fh.write("\n")


def read_snapshot(path: str | Path) -> tuple[str, GridSpec, dict[str, np.ndarray]]:
    """Parse a snapshot (text or binary payload, detected from the content)."""
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    parts = raw[:nl].decode("ascii").split()
    if len(parts) != 6 or parts[0] != MAGIC:
        raise ConfigError(f"{path}: not a {MAGIC} snapshot")
    kind, nx, ny, eps, boundary = parts[1], int(parts[2]), int(parts[3]), float(parts[4]), parts[5]
    if kind not in COMPONENTS:
        raise ConfigError(f"{path}: unknown snapshot kind {kind!r}")
    grid = GridSpec(nx, ny, eps, boundary)
    names = COMPONENTS[kind]
    sizes = [int(np.prod(_component_shape(n, grid))) for n in names]
    payload = raw[nl + 1:]
    total = sum(sizes)
    if len(payload) == 8 * total:
        values = np.frombuffer(payload, dtype="<f8")
    else:
        values = np.loadtxt(io.BytesIO(payload)).ravel()
        if values.size != total:
            raise ConfigError(f"{path}: expected {total} values, found {values.size}")
    out: dict[str, np.ndarray] = {}
    offset = 0
    for name, size in zip(names, sizes):
        out[name] = values[offset: offset + size].reshape(_component_shape(name, grid)).copy()
        offset += size
    return kind, grid, out
