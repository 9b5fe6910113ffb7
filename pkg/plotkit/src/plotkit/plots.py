"""Figure rendering: time series, field lines, current density, convergence.

Field lines are drawn as contours of the vertex flux function,
reconstructed by line-integrating the edge magnetic field; this is exact
for divergence-free edge fields (path independence is checked and
reported as the loop-closure defect).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import BadSnapshot, BadTable, MissingColumn, Snapshot, read_csv, read_snapshot

__all__ = [
    "flux_function",
    "loop_closure_defect",
    "vertex_curl",
    "plot_timeseries",
    "plot_fieldlines",
    "plot_current",
    "plot_convergence",
]


def _require_magnetic(snap: Snapshot) -> tuple[np.ndarray, np.ndarray]:
    if "Bx" not in snap.fields or "By" not in snap.fields:
        raise BadSnapshot(f"snapshot kind {snap.kind!r} carries no magnetic field")
    return snap.fields["Bx"], snap.fields["By"]


def flux_function(snap: Snapshot) -> np.ndarray:
    """Vertex flux function A with Bx = dA/dy, By = -dA/dx.

    Integrates -By along the first vertex row, then Bx up each column.
    Path independence holds exactly when div B = 0.
    """
    bx, by = _require_magnetic(snap)
    eps = snap.eps
    nvx = snap.nx if snap.periodic else snap.nx + 1
    nvy = snap.ny if snap.periodic else snap.ny + 1
    a = np.zeros((nvx, nvy))
    for i in range(1, nvx):
        a[i, 0] = a[i - 1, 0] - eps * by[i - 1, 0]
    for j in range(1, nvy):
        a[:, j] = a[:, j - 1] + eps * bx[:nvx, j - 1]
    return a


def loop_closure_defect(snap: Snapshot) -> float:
    """Max plaquette closure defect of the flux reconstruction.

    Equals eps^2 max |div B|; ~1e-10 or below certifies that the contour
    plot is a faithful field-line picture.
    """
    bx, by = _require_magnetic(snap)
    eps = snap.eps
    if snap.periodic:
        div = (np.roll(bx, -1, axis=0) - bx + np.roll(by, -1, axis=1) - by) / eps
    else:
        div = (bx[1:, :] - bx[:-1, :] + by[:, 1:] - by[:, :-1]) / eps
    return float(np.abs(div).max() * eps**2)


def vertex_curl(snap: Snapshot) -> np.ndarray:
    """Vertex curl of the magnetic field: the current density j = curl B."""
    bx, by = _require_magnetic(snap)
    eps = snap.eps
    if snap.periodic:
        return (np.roll(bx, 1, axis=1) - bx + by - np.roll(by, 1, axis=0)) / eps
    pu = np.zeros((snap.nx + 1, snap.ny + 2))
    pu[:, 1:-1] = bx
    pv = np.zeros((snap.nx + 2, snap.ny + 1))
    pv[1:-1, :] = by
    return (pu[:, :-1] - pu[:, 1:] + pv[1:, :] - pv[:-1, :]) / eps


def _save(fig, out_path: str | Path) -> Path:
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_timeseries(csv_path: str | Path, columns: list[str], out_path: str | Path):
    """One labeled line per requested diagnostics column against t."""
    data = read_csv(csv_path)
    missing = [c for c in columns if c not in data]
    if missing:
        raise MissingColumn(f"columns not in {csv_path}: {', '.join(missing)}")
    t = data.get("t", np.arange(len(next(iter(data.values())))))
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in columns:
        ax.plot(t, data[name], label=name, lw=1.2)
    ax.set_xlabel("t")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, out_path), fig


def plot_fieldlines(snapshot_path: str | Path, out_path: str | Path, levels: int = 24):
    """Contours of the reconstructed vertex flux function."""
    snap = read_snapshot(snapshot_path)
    a = flux_function(snap)
    x = snap.eps * np.arange(a.shape[0])
    y = snap.eps * np.arange(a.shape[1])
    fig, ax = plt.subplots(figsize=(6, 6 * snap.ny / snap.nx))
    ax.contour(x, y, a.T, levels=levels, linewidths=0.8, colors="k")
    ax.set_aspect("equal")
    ax.set_title(f"field lines ({snap.kind}, {snap.nx}x{snap.ny})", fontsize=9)
    return _save(fig, out_path), snap


def plot_current(snapshot_path: str | Path, out_path: str | Path, levels: int = 30):
    """Contours of the current density curl B at vertices."""
    snap = read_snapshot(snapshot_path)
    j = vertex_curl(snap)
    x = snap.eps * np.arange(j.shape[0])
    y = snap.eps * np.arange(j.shape[1])
    fig, ax = plt.subplots(figsize=(6, 6 * snap.ny / snap.nx))
    ax.contour(x, y, j.T, levels=levels, linewidths=0.7)
    ax.set_aspect("equal")
    ax.set_title(f"current density ({snap.nx}x{snap.ny})", fontsize=9)
    return _save(fig, out_path), snap


def fit_convergence_slope(table: dict[str, np.ndarray]) -> float:
    res = table.get("resolution")
    diff = table.get("velocity_difference")
    if res is None or diff is None:
        raise BadTable("convergence table needs resolution and velocity_difference columns")
    if len(res) < 2:
        raise BadTable("convergence table needs at least two rows to fit a slope")
    return float(-np.polyfit(np.log2(res), np.log2(diff), 1)[0])


def plot_convergence(table_path: str | Path, out_path: str | Path):
    """Log-log refinement differences with the fitted slope annotated."""
    table = read_csv(table_path)
    slope = fit_convergence_slope(table)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(table["resolution"], table["velocity_difference"], "o-", label="velocity", base=2)
    mag = table.get("magnetic_difference")
    if mag is not None and np.isfinite(mag).all():
        ax.loglog(table["resolution"], mag, "s--", label="magnetic", base=2)
    ax.set_xlabel("resolution")
    ax.set_ylabel("successive L2 difference")
    ax.annotate(f"slope {slope:.2f}", xy=(0.05, 0.08), xycoords="axes fraction")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    return _save(fig, out_path), slope
