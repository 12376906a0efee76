"""Exception hierarchy for the package."""


class ErmakovQubitError(Exception):
    """Base class for all errors raised by ermakovqubit."""


class ParameterError(ErmakovQubitError, ValueError):
    """Invalid or out-of-domain input parameter."""


class EvaluationError(ErmakovQubitError, ArithmeticError):
    """A function of time produced a non-finite value."""


class PropagatorRangeError(ErmakovQubitError, OverflowError):
    """|Re Δf| is too large to exponentiate safely."""


class SingularityError(ErmakovQubitError, ZeroDivisionError):
    """A denominator vanished; ``location`` holds the offending time when known."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class InvalidPairingError(ErmakovQubitError):
    """Oscillator solution and driving field violate the α(0)=0 limit."""


class SynthesisError(ErmakovQubitError):
    """The inverse construction of a driving field failed."""


class DegenerateFamilyError(ParameterError):
    """Family parameters collapse to a trivial (Ω0 = 0) configuration."""


class StiffnessError(ErmakovQubitError):
    """The numerical integrator could not advance; ``time`` is where it stalled."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time
