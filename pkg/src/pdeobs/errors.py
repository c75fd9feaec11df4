"""Exception hierarchy shared by all modules."""


class ObservabilityError(Exception):
    """Base class for every error raised by :mod:`pdeobs`."""


class InvalidInputError(ObservabilityError, ValueError):
    pass


class DegenerateMetricError(ObservabilityError):
    """A matrix expected to be positive definite has a non-positive pivot."""

    def __init__(self, pivot_index, pivot_value):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot_index} = {pivot_value:.3e}"
        )


class LinearDependenceError(ObservabilityError):
    def __init__(self, index, ratio):
        self.index = index
        self.ratio = ratio
        super().__init__(
            f"vector {index} is linearly dependent on its predecessors "
            f"(residual/original norm = {ratio:.3e})"
        )


class BlowUpError(ObservabilityError):
    """Integration produced a non-finite state."""

    def __init__(self, time, index=None):
        self.time = time
        self.index = index
        where = "" if index is None else f" (basis direction {index})"
        super().__init__(f"non-finite state at t = {time:.6g}{where}")


class AssemblyError(ObservabilityError):
    pass


class SearchFailureError(ObservabilityError):
    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class SweepError(ObservabilityError):
    def __init__(self, message, failures=()):
        self.failures = list(failures)
        super().__init__(message)
