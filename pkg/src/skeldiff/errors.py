"""Exception types shared across the toolkit."""


class SkeldiffError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SkeldiffError):
    """Source text does not conform to the seed-language grammar."""

    def __init__(self, message: str, line: int, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class UnknownGate(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class QubitOutOfRange(ParseError):
    pass


class QubitOperandConflict(ParseError):
    """The same qubit appears twice in one multi-qubit gate."""


class FuelExhausted(SkeldiffError):
    """Classical interpretation exceeded its executed-statement budget."""


class EmptyEnumeration(SkeldiffError):
    """An exact-mode partition enumeration has no elements."""


class RejectionExhausted(SkeldiffError):
    """Quantum hole sampling could not find an acceptable assignment."""


class IncompleteAssignment(SkeldiffError):
    """A hole assignment does not cover every hole of the skeleton."""


class MissingAngle(SkeldiffError):
    pass


class UnexpectedAngle(SkeldiffError):
    pass


class QubitBudgetExceeded(SkeldiffError):
    """Circuit is too wide for the requested backend."""


class DimensionMismatch(SkeldiffError):
    pass


class NotUnitary(SkeldiffError):
    pass


class UnknownFault(SkeldiffError):
    pass


class EmptySample(SkeldiffError):
    pass


class NotAMismatch(SkeldiffError):
    """Minimization was asked to shrink a verdict that is not a mismatch."""


class ConfigError(SkeldiffError):
    pass


class GenerationRetryExhausted(SkeldiffError):
    """Seed generation kept violating its post-conditions."""


class AdapterError(SkeldiffError):
    """The external backend subprocess misbehaved."""
