"""Exception types shared across the solver.

Every error raised on a contract violation derives from SolitonError so
callers (and the CLI) can catch one base class and emit a structured
report.
"""


class SolitonError(Exception):
    """Base class for all solver errors."""

    def payload(self) -> dict:
        """Machine-readable form used by the CLI error channel."""
        return {"type": type(self).__name__, "message": str(self)}


class DegenerateState(SolitonError):
    """State evaluation requested where a metric coefficient is <= 0."""


class InvalidCase(SolitonError):
    """Parameters or boundary data outside the supported family."""


class ResonanceFailure(SolitonError):
    """A series-recursion linear solve lost its pivot (|coeff| < 1e-14)."""


class OutOfRadius(SolitonError):
    """Jet evaluation requested beyond the validated handoff radius."""


class NoSignChange(SolitonError):
    """Event localization called on a step with no trigger sign change."""


class NotApplicable(SolitonError):
    """Shooting requested where no critical value exists (a1 <= n+1)."""


class BracketInvalid(SolitonError):
    """Initial shooting endpoints do not classify as Collapsed/Crossing."""


class Inconclusive(SolitonError):
    """Classification stayed Undetermined at the escalation cap."""


class OutOfDomain(SolitonError):
    """Closed-form profile evaluated outside its radial domain."""


class MismatchedParams(SolitonError):
    """Comparison between runs with incompatible parameters."""


class WindowTooShort(SolitonError):
    """Tail-fit window holds too few samples for a meaningful fit."""


class NotCollapsed(SolitonError):
    """Decay verification requested on a non-collapsed trajectory."""


class BadDimension(SolitonError):
    """Rotationally symmetric family needs an integer dimension >= 3."""
