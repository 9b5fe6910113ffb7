"""Flat sectioned key-value run configuration files.

Grammar: INI sections [run], [grid], [solver], [params]; keys are plain
identifiers, values decimal numbers or bare words.  Every preset dumps to
this format so variants can be derived by editing.

    [run]
    model = mhd
    ic = orszag-tang
    h = 0.01
    t_end = 0.75
    steps_per_snapshot = 20

    [grid]
    nx = 64
    ny = 64
    x0 = 0 ...
    boundary = periodic

    [solver]
    picard_max = 200 ...

    [params]
    beta = 5.0 ...
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError
from .presets import RunConfig
from .timestepper import SolverConfig

__all__ = ["dump_config", "parse_config"]


def dump_config(config: RunConfig) -> str:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # parameter names are case sensitive
    cp["run"] = {
        "model": config.model,
        "ic": config.ic,
        "h": f"{config.h:.17g}",
        "t_end": f"{config.t_end:.17g}",
        "steps_per_snapshot": str(config.steps_per_snapshot),
    }
    cp["grid"] = {
        "nx": str(config.nx),
        "ny": str(config.ny),
        "x0": f"{config.x0:.17g}",
        "x1": f"{config.x1:.17g}",
        "y0": f"{config.y0:.17g}",
        "y1": f"{config.y1:.17g}",
        "boundary": config.boundary,
    }
    cp["solver"] = {
        "picard_max": str(config.solver.picard_max),
        "residual_tol": f"{config.solver.residual_tol:.17g}",
        "poisson_tol": f"{config.solver.poisson_tol:.17g}",
        "linear_max_iter": str(config.solver.linear_max_iter),
    }
    cp["params"] = {k: f"{v:.17g}" for k, v in sorted(config.params.items())}
    import io

    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def parse_config(text_or_path: str | Path, from_file: bool = True) -> RunConfig:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        if from_file:
            with open(text_or_path) as fh:
                cp.read_file(fh)
        else:
            cp.read_string(str(text_or_path))
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    try:
        run = cp["run"]
        grid = cp["grid"]
        solver = cp["solver"] if cp.has_section("solver") else {}
        params = {k: float(v) for k, v in cp.items("params")} if cp.has_section("params") else {}
        return RunConfig(
            model=run["model"],
            ic=run.get("ic", run["model"]),
            h=float(run["h"]),
            t_end=float(run["t_end"]),
            steps_per_snapshot=int(run.get("steps_per_snapshot", "20")),
            nx=int(grid["nx"]),
            ny=int(grid["ny"]),
            x0=float(grid["x0"]),
            x1=float(grid["x1"]),
            y0=float(grid["y0"]),
            y1=float(grid["y1"]),
            boundary=grid.get("boundary", "periodic"),
            solver=SolverConfig(
                picard_max=int(solver.get("picard_max", "400")),
                residual_tol=float(solver.get("residual_tol", "1e-10")),
                poisson_tol=float(solver.get("poisson_tol", "1e-12")),
                linear_max_iter=int(solver.get("linear_max_iter", "4000")),
            ),
            params=params,
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
