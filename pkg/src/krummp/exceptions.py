"""Exception hierarchy for the estimator pipeline."""


class KrummpError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(KrummpError, ValueError):
    """Invalid user-supplied parameters or configuration files."""


class NumericalError(KrummpError, ArithmeticError):
    """Base class for numerical failures inside the estimators."""


class DegenerateInputError(NumericalError):
    """The K-th singular value of the data matrix is too small to separate K spikes."""

    def __init__(self, sigma, message=None):
        self.sigma = float(sigma)
        super().__init__(message or f"rank-deficient input: sigma_K = {self.sigma:.3e}")


class ZeroEigenvalueError(NumericalError):
    def __init__(self, value):
        self.value = float(value)
        super().__init__(f"generalized eigenvalue too close to zero: |lambda| = {self.value:.3e}")


class CoincidentNodesError(NumericalError):
    def __init__(self, distance):
        self.distance = float(distance)
        super().__init__(f"Vandermonde nodes coincide (distance {self.distance:.3e})")


class StageFailure(NumericalError):
    """A KrUMMP stage could not produce an estimate.

    ``stage`` is the 1-based group index; ``frequency`` is set when the failure
    came from deconvolution overflow.
    """

    def __init__(self, stage, message, frequency=None):
        self.stage = stage
        self.frequency = frequency
        super().__init__(f"stage {stage}: {message}")


class InfeasibleInstanceError(KrummpError, RuntimeError):
    """Rejection sampling could not satisfy the separation constraint."""
