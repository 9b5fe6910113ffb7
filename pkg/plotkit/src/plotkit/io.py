"""Parsers for the geovar CSV and snapshot file formats.

Implemented against the documented interfaces only: the diagnostics CSV
is a header row plus comma-separated decimal rows; snapshots start with

    GEOVAR1 <kind> <nx> <ny> <eps> <boundary>

followed by per-component row-major payloads, whitespace-separated text
or raw little-endian float64.  Component order per kind:

    fluid         u v p
    mhd           u v Bx By p
    nematic       u v alpha omega p
    microstretch  u v alpha j_r j_s lam omega p stretch

Edge-based components u/Bx live on vertical edges, shape (nx[+1], ny);
v/By on horizontal edges, shape (nx, ny[+1]); the +1 applies on
no-normal-flow grids.  Cell fields are (nx, ny).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["PlotkitError", "MissingColumn", "BadSnapshot", "BadTable", "Snapshot", "read_csv", "read_snapshot"]

MAGIC = "GEOVAR1"

COMPONENTS = {
    "fluid": ("u", "v", "p"),
    "mhd": ("u", "v", "Bx", "By", "p"),
    "nematic": ("u", "v", "alpha", "omega", "p"),
    "microstretch": ("u", "v", "alpha", "j_r", "j_s", "lam", "omega", "p", "stretch"),
}


class PlotkitError(Exception):
    pass


class MissingColumn(PlotkitError):
    pass


class BadSnapshot(PlotkitError):
    pass


class BadTable(PlotkitError):
    pass


@dataclass(frozen=True)
class Snapshot:
    kind: str
    nx: int
    ny: int
    eps: float
    boundary: str
    fields: dict

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Diagnostics CSV as a column-name -> array mapping."""
    lines = Path(path).read_text().strip().split("\n")
    if not lines or not lines[0]:
        raise BadTable(f"{path}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    body = [ln for ln in lines[1:] if ln.strip()]
    if not body:
        raise BadTable(f"{path}: no data rows")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body])
    if data.shape[1] != len(header):
        raise BadTable(f"{path}: ragged rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def _shape_of(name: str, nx: int, ny: int, periodic: bool) -> tuple[int, int]:
    if name in ("u", "Bx"):
        return (nx if periodic else nx + 1, ny)
    if name in ("v", "By"):
        return (nx, ny if periodic else ny + 1)
    return (nx, ny)


def read_snapshot(path: str | Path) -> Snapshot:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise BadSnapshot(f"{path}: missing header")
    parts = raw[:nl].decode("ascii", errors="replace").split()
    if len(parts) != 6 or parts[0] != MAGIC:
        raise BadSnapshot(f"{path}: not a {MAGIC} snapshot")
    kind, boundary = parts[1], parts[5]
    if kind not in COMPONENTS:
        raise BadSnapshot(f"{path}: unknown kind {kind!r}")
    nx, ny, eps = int(parts[2]), int(parts[3]), float(parts[4])
    periodic = boundary == "periodic"
    names = COMPONENTS[kind]
    shapes = [_shape_of(n, nx, ny, periodic) for n in names]
    total = sum(int(np.prod(s)) for s in shapes)
    payload = raw[nl + 1:]
    if len(payload) == 8 * total:
        values = np.frombuffer(payload, dtype="<f8")
    else:
        try:
            values = np.loadtxt(io.BytesIO(payload)).ravel()
        except ValueError as exc:
            raise BadSnapshot(f"{path}: unreadable payload: {exc}") from exc
        if values.size != total:
            raise BadSnapshot(f"{path}: expected {total} values, found {values.size}")
    fields = {}
    offset = 0
    for name, shape in zip(names, shapes):
        size = int(np.prod(shape))
        fields[name] = values[offset: offset + size].reshape(shape).copy()
        offset += size
    return Snapshot(kind, nx, ny, eps, boundary, fields)
