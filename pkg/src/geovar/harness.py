"""Run loop, CSV/snapshot emission, and the convergence-study driver."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticsRecord, record_for, refinement_difference
from .errors import ConfigError, NoConvergence
from .finite_dim import (
    HeavyTopState,
    RigidBodyState,
    heavy_top_energy,
    heavy_top_step,
    rigid_energy,
    rigid_step,
    spatial_momentum,
)
from .lie_core import NewtonConfig
from .models import StepStats, fluid_step, mhd_step, microstretch_step, nematic_step
from .presets import RunConfig, build_initial_state, load_preset
from .snapshots import write_snapshot

__all__ = ["RunResult", "run", "simulate", "convergence_study", "ConvergenceResult"]

_FINITE_DIM_COLUMNS = (
    "t", "k", "omega_x", "omega_y", "omega_z", "energy",
    "momentum_x", "momentum_y", "momentum_z",
)

_STEPPERS: dict[str, Callable] = {
    "fluid": fluid_step,
    "mhd": mhd_step,
    "nematic": nematic_step,
    "microstretch": microstretch_step,
}


@dataclass
class RunResult:
    config: RunConfig
    final_state: object
    records: list
    csv_path: Path | None
    failed: bool = False
    error: str = ""


def simulate(config: RunConfig) -> Iterator[tuple[object, StepStats]]:
    """Yield (state, stats) after every step, for grid models."""
    state = build_initial_state(config)
    stepper = _STEPPERS[config.model]
    for _ in range(config.n_steps):
        state, stats = stepper(state, config.h, config.solver)
        yield state, stats


def _finite_dim_row(state: RigidBodyState, h: float, k: int) -> tuple:
    if isinstance(state, HeavyTopState):
        e = heavy_top_energy(state)
    else:
        e = rigid_energy(state)
    mom = spatial_momentum(state, h)
    return (k * h, k, *state.omega, e, *mom)


def run(config: RunConfig, out_dir: str | Path | None = None, binary: bool = False) -> RunResult:
    """Step the configured model from t=0 to t_end.

    Writes one diagnostics CSV row per step and grid snapshots at the
    configured cadence.  On solver failure the partial outputs are kept,
    a failure manifest is written, and the error re-raised.
    """
    out = Path(out_dir) if out_dir is not None else (Path(config.out_dir) if config.out_dir else None)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "diagnostics.csv" if out is not None else None

    if config.model in ("rigid-body", "heavy-top"):
        return _run_finite_dim(config, out, csv_path)

    state = build_initial_state(config)
    records: list[DiagnosticsRecord] = []
    fh = open(csv_path, "w") if csv_path is not None else None
    try:
        if fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
        if out is not None:
            write_snapshot(out / "snap_000000.dat", state, binary=binary)
        stepper = _STEPPERS[config.model]
        for k in range(1, config.n_steps + 1):
            try:
                state, stats = stepper(state, config.h, config.solver)
            except NoConvergence as exc:
                if fh:
                    fh.flush()
                if out is not None:
                    (out / "failure-manifest.txt").write_text(
                        f"step={k}\nt={state.t + config.h}\nerror={exc}\nresidual={exc.residual}\n"
                    )
                raise
            rec = record_for(state, config.h, stats.picard_iters, stats.residual)
            records.append(rec)
            if fh:
                fh.write(rec.to_row() + "\n")
            if out is not None and k % config.steps_per_snapshot == 0:
                write_snapshot(out / f"snap_{k:06d}.dat", state, binary=binary)
    finally:
        if fh:
            fh.close()
    return RunResult(config, state, records, csv_path)


def _run_finite_dim(config: RunConfig, out: Path | None, csv_path: Path | None) -> RunResult:
    state = build_initial_state(config)
    solver = NewtonConfig(residual_tol=min(config.solver.residual_tol, 1e-13))
    step = heavy_top_step if config.model == "heavy-top" else rigid_step
    rows = []
    fh = open(csv_path, "w") if csv_path is not None else None
    try:
        if fh:
            fh.write(",".join(_FINITE_DIM_COLUMNS) + "\n")
        for k in range(1, config.n_steps + 1):
            state = step(state, config.h, solver)
            row = _finite_dim_row(state, config.h, k)
            rows.append(row)
            if fh:
                fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row) + "\n")
    finally:
        if fh:
            fh.close()
    return RunResult(config, state, rows, csv_path)


# ---------------------------------------------------------------------------
# Convergence study
# ---------------------------------------------------------------------------


@dataclass
class ConvergenceResult:
    resolutions: list[int]
    velocity_differences: list[float]
    magnetic_differences: list[float]
    slope_velocity: float
    slope_magnetic: float

    def to_csv(self) -> str:
        lines = ["resolution,velocity_difference,magnetic_difference"]
        for n, dv, db in zip(self.resolutions, self.velocity_differences, self.magnetic_differences):
            lines.append(f"{n},{dv:.17g},{db:.17g}")
        return "\n".join(lines) + "\n"


def convergence_study(
    base_preset: str = "orszag-tang",
    resolutions: tuple[int, ...] = (8, 16, 32, 64),
    eps_over_h: float = 7.85,
    t_compare: float = 0.25,
) -> ConvergenceResult:
    """L2 differences between successive power-of-two refinements.

    Each resolution runs to t_compare with h chosen so eps/h is as close
    to the requested ratio as an integer step count allows.  The fitted
    log2 slope of the differences against the finer resolution is the
    observed convergence order.
    """
    for a, b in zip(resolutions, resolutions[1:]):
        if b != 2 * a:
            raise ConfigError("resolutions must be successive powers of two")

    def final_state(n: int):
        base = load_preset(base_preset)
        eps = (base.x1 - base.x0) / n
        steps = max(2, round(t_compare / (eps / eps_over_h)))
        cfg = load_preset(base_preset, nx=n, ny=n, h=t_compare / steps, t_end=t_compare)
        state = None
        for state, _ in simulate(cfg):
            pass
        return state

    workers = max(1, int(os.environ.get("GEOVAR_THREADS", "1") or 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            states = list(pool.map(final_state, resolutions))
    else:
        states = [final_state(n) for n in resolutions]

    fine_res, dvs, dbs = [], [], []
    for coarse, fine, n_fine in zip(states, states[1:], resolutions[1:]):
        diff = refinement_difference(coarse, fine)
        fine_res.append(n_fine)
        dvs.append(diff.velocity)
        dbs.append(diff.magnetic if diff.magnetic is not None else math.nan)

    def slope(ds: list[float]) -> float:
        x = np.log2(np.asarray(fine_res, dtype=float))
        y = np.log2(np.asarray(ds))
        return float(-np.polyfit(x, y, 1)[0])

    return ConvergenceResult(fine_res, dvs, dbs, slope(dvs), slope(dbs))
