"""Exception types shared across the laboratory."""


class NsplabError(Exception):
    """Base class for all errors raised by nsplab."""


class DegenerateShock(NsplabError):
    """Far-field states coincide; there is no shock to construct."""


class LaxViolation(NsplabError):
    """End states violate the 2-shock admissibility ordering v_- < v_+."""


class NonPositiveVolume(NsplabError):
    """A specific-volume field reached v <= 0 (vacuum)."""


class NoConnection(NsplabError):
    """The profile solver failed to connect the two rest states."""


class UnexpectedSpectrum(NsplabError):
    """The rest-point linearization does not have the expected structure."""


class NewtonDiverged(NsplabError):
    """Poisson Newton iteration exceeded its budget.

    Carries the last residual norm in ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ZeroDenominator(NsplabError):
    """A ratio diagnostic was requested with an identically zero denominator."""


class ValidationError(NsplabError):
    """Configuration or precondition violations (all collected, not just the first).

    ``violations`` is the list of human-readable messages.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(NsplabError):
    """A configuration document could not be parsed."""
