"""Offline figure rendering for geovar simulation outputs."""

from .io import BadSnapshot, BadTable, MissingColumn, PlotkitError, Snapshot, read_csv, read_snapshot
from .plots import (
    fit_convergence_slope,
    flux_function,
    loop_closure_defect,
    plot_convergence,
    plot_current,
    plot_fieldlines,
    plot_timeseries,
    vertex_curl,
)

__version__ = "0.1.0"

__all__ = [
    "BadSnapshot",
    "BadTable",
    "MissingColumn",
    "PlotkitError",
    "Snapshot",
    "fit_convergence_slope",
    "flux_function",
    "loop_closure_defect",
    "plot_convergence",
    "plot_current",
    "plot_fieldlines",
    "plot_timeseries",
    "read_csv",
    "read_snapshot",
    "vertex_curl",
]
