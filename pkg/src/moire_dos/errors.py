class MoireDosError(Exception):
    """Base class for errors raised by moire_dos."""


class InvalidLatticeError(MoireDosError, ValueError):
    pass


class LatticeMismatchError(MoireDosError, ValueError):
    pass


class ResourceLimitError(MoireDosError):
    """Raised when a planewave set would exceed the configured entry cap."""

    def __init__(self, projected, cap):
        super().__init__(f"planewave set would hold ~{projected} entries (cap {cap})")
        self.projected = projected
        self.cap = cap

    def __reduce__(self):
        return type(self), (self.projected, self.cap)


class EigenSolverError(MoireDosError, ArithmeticError):
    def __init__(self, n, xi, cause=None):
        super().__init__(f"eigensolver failed for N={n} at xi={tuple(xi)}: {cause}")
        self.n = n
        self.xi = tuple(xi)
        self.cause = cause

    def __reduce__(self):
        return type(self), (self.n, self.xi, str(self.cause))


class NodeEvaluationError(MoireDosError):
    def __init__(self, xi, cause):
        super().__init__(f"evaluation failed at xi={tuple(xi)}: {cause}")
        self.xi = tuple(xi)
        self.cause = cause

    def __reduce__(self):
        return type(self), (self.xi, str(self.cause))


class ConfigError(MoireDosError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message

    def __reduce__(self):
        return type(self), (self.key, self.message)
