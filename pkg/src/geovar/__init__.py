"""Structure-preserving variational integrators on staggered grids.

Rigid body and heavy top on SO(3); incompressible fluid, ideal MHD,
nematic liquid crystal, and microstretch fluid flow on 2-D cartesian
staggered grids, with exact discrete conservation of the momenta the
schemes inherit from their variational derivation.
"""

from .errors import (
    ConfigError,
    ConstraintViolated,
    GeovarError,
    IncompatibleGrids,
    IncompatibleRHS,
    NoConvergence,
    NotWeaklyNull,
    PoissonNoConvergence,
    ShapeMismatch,
    SingularMatrix,
    SupportViolation,
    UnknownPreset,
    WrongModel,
)
from .grid import CellField, GridSpec, StaggeredVectorField, VertexField
from .models import FluidState, MhdState, MicrostretchState, NematicState
from .presets import RunConfig, load_preset
from .timestepper import SolverConfig

__version__ = "0.1.0"

__all__ = [
    "CellField",
    "ConfigError",
    "ConstraintViolated",
    "FluidState",
    "GeovarError",
    "GridSpec",
    "IncompatibleGrids",
    "IncompatibleRHS",
    "MhdState",
    "MicrostretchState",
    "NematicState",
    "NoConvergence",
    "NotWeaklyNull",
    "PoissonNoConvergence",
    "RunConfig",
    "ShapeMismatch",
    "SingularMatrix",
    "SolverConfig",
    "StaggeredVectorField",
    "SupportViolation",
    "UnknownPreset",
    "VertexField",
    "WrongModel",
    "load_preset",
    "__version__",
]
