"""Exception hierarchy shared by all nosig modules."""


class NosigError(Exception):
    """Base class for every error raised by this package."""


class InvalidStateError(NosigError, ValueError):
    """A vector or matrix violates the invariants of the requested state type."""


class DimensionMismatchError(NosigError, ValueError):
    pass


class NumericalIntegrityError(NosigError, ArithmeticError):
    """A computed probability escaped [0, 1] by more than round-off allows."""


class OutcomeImpossibleError(NosigError):
    def __init__(self, probability: float):
        super().__init__(f"outcome has probability {probability:.3e}; no conditional state")
        self.probability = probability


class MismatchedDensityError(NosigError, ValueError):
    """Two objects that must share a density matrix do not."""

    def __init__(self, trace_distance: float, message: str | None = None):
        super().__init__(message or f"density matrices differ: trace distance {trace_distance:.17g}")
        self.trace_distance = trace_distance


class InfeasibleEnsembleError(NosigError, ValueError):
    pass


class NotCompletelyPositiveError(NosigError, ValueError):
    def __init__(self, eigenvalue: float):
        super().__init__(f"Choi matrix has negative eigenvalue {eigenvalue:.17g}")
        self.eigenvalue = eigenvalue


class InvalidDynamicsError(NosigError, ValueError):
    """A dynamics map produced something that is not a density matrix."""


class DegenerateInputError(NosigError, ValueError):
    pass


class UnverifiedProtocolError(NosigError, ValueError):
    pass
