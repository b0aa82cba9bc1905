"""Exception types shared across the package."""


class InvalidDimensionError(ValueError):
    """Operator or layout dimensions are invalid or inconsistent."""


class ContractViolationError(ValueError):
    """An input failed a numerical precondition (e.g. not Hermitian/unitary)."""


class HybridizationError(RuntimeError):
    """A dressed level cannot be assigned to a bare label (overlap <= 0.5).

    Carries the offending bare label so callers can flag or skip the
    configuration that produced the frequency collision.
    """

    def __init__(self, label, overlap=None, detail=""):
        self.label = tuple(label)
        self.overlap = overlap
        msg = f"cannot label dressed level for bare state |{''.join(map(str, label))}>"
        if overlap is not None:
            msg += f" (best overlap {overlap:.4f} <= 0.5)"
        if detail:
            msg += f"; {detail}"
        super().__init__(msg)


class AccuracyError(RuntimeError):
    """Propagation failed an internal accuracy or unitarity check."""


class CalibrationError(RuntimeError):
    """Pulse calibration did not reach the required fidelity.

    ``best`` holds the best parameters found, ``infidelity`` the value
    they achieve, so callers can inspect near-misses.
    """

    def __init__(self, message, best=None, infidelity=None):
        super().__init__(message)
        self.best = best
        self.infidelity = infidelity


class ObjectiveError(RuntimeError):
    """The optimizer hit a non-finite objective value.

    ``point`` is the parameter vector that produced it.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ConfigError(ValueError):
    """A run configuration is malformed; message names the offending field."""
