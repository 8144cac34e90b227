"""Exception hierarchy shared across the toolkit.

Two branches matter to callers: ``ModelError`` for bad inputs or scenario
content (CLI exit status 1) and ``NumericalError`` for singularities and
non-convergence discovered during a solve (CLI exit status 2).
"""


class AdmrelayError(Exception):
    """Base class for all toolkit errors."""


class ModelError(AdmrelayError):
    """Invalid model data or an operation applied to an incompatible model."""


class ScenarioError(ModelError):
    """Malformed scenario file; message names the offending section/field."""


class NumericalError(AdmrelayError):
    """A computation failed numerically (singular, degenerate or divergent)."""


class DegenerateParallelError(NumericalError):
    """Parallel combination of impedances whose sum is numerically zero."""


class SingularSystemError(NumericalError):
    """Nodal system is singular or its solution residual is unacceptable."""


class ConvergenceError(NumericalError):
    """Iterative loop (current-limiter fixed point) failed to converge."""


class MeasurementError(NumericalError):
    """Relay measurement is undefined (no current in the fault loop)."""
