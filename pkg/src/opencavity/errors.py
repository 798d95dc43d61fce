"""Exception and warning types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the model is defined."""


class NoResonatorError(DomainError):
    """The mirror reflectivity vanishes, so no resonance can be defined."""


class FitDiverged(RuntimeError):
    """A Lorentzian fit failed or deviates too much from the exact response."""

    def __init__(self, message, window=None, residual=None):
        super().__init__(message)
        self.window = window
        self.residual = residual


class OverlappingPeaks(FitDiverged):
    """Two resonances are too close to be fitted as single Lorentzians."""

    def __init__(self, message, candidates):
        super().__init__(message)
        self.candidates = candidates


class NumericalInstability(RuntimeError):
    """Time integration lost norm beyond tolerance; use a smaller step."""


class NoResonantMode(LookupError):
    """No cavity resonance lies close enough to the atomic transition."""


class ValidityWarning(UserWarning):
    """The single-mode effective description is close to breaking down."""
