"""Exception types shared across the toolkit."""


class GeovarError(Exception):
    """Base class for all toolkit errors."""


class SingularMatrix(GeovarError):
    """Cayley transform requested at a numerically singular I - A/2."""


class NoConvergence(GeovarError):
    """An iterative solve exhausted its budget.

    Carries the final residual so callers can report partial progress.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ShapeMismatch(GeovarError):
    """Field array shape inconsistent with the grid and boundary type."""


class ConstraintViolated(GeovarError):
    """A divergence-free (or similar) precondition was violated."""


class PoissonNoConvergence(NoConvergence):
    """Pressure Poisson solve failed to reach tolerance."""


class IncompatibleRHS(GeovarError):
    """Poisson right-hand side incompatible with the boundary conditions."""


class NotWeaklyNull(GeovarError):
    """One-form is not weakly null: no discrete pressure reproduces it."""


class SupportViolation(GeovarError):
    """Matrix support extends beyond what the operator admits."""


class IncompatibleGrids(GeovarError):
    """Grids are not related by the required refinement."""


class WrongModel(GeovarError):
    """Diagnostic applied to a state of the wrong model."""


class UnknownPreset(GeovarError):
    """Benchmark preset name not recognized."""


class ConfigError(GeovarError):
    """Run configuration is malformed or inconsistent."""
