"""Exception and warning types shared across the package."""


class CollusionLabError(Exception):
    """Base class for all package errors."""


class InvalidParameters(CollusionLabError, ValueError):
    """Market or solver parameters violate their invariants."""


class OutOfRangeTarget(CollusionLabError, ValueError):
    """Target collusive price lies outside (p*, p^M]."""


class DegenerateMonitoringWarning(UserWarning):
    """Detection probability is zero, so punishment never triggers."""


class NonUnimodalWarning(UserWarning):
    """Coarse scan found several separated local maxima of the objective."""


class NoConvergence(CollusionLabError):
    pass


class CapReached(CollusionLabError):
    pass


class ScriptExhausted(CollusionLabError, IndexError):
    pass


class TemplateOverflow(CollusionLabError):
    """A rendered prompt exceeds the configured character budget."""


class MalformedResponse(CollusionLabError):
    """No parsable boxed numeric value in an LLM response."""


class NonPositivePrice(MalformedResponse):
    pass


class RoundMismatchWarning(UserWarning):
    """The echoed <round> tag disagrees with the prompted round."""


class BackendError(CollusionLabError):
    pass


class TransportError(BackendError):
    pass


class BackendTimeout(TransportError):
    pass


class AgentFailure(CollusionLabError):
    """An agent could not produce a valid price after exhausting retries."""


class RunAborted(CollusionLabError):
    """A run stopped early because an agent failed; partial logs were flushed."""

    def __init__(self, message, *, period=None, agent=None):
        super().__init__(message)
        self.period = period
        self.agent = agent


class InsufficientSample(CollusionLabError, ValueError):
    pass


class ConfigError(CollusionLabError, ValueError):
    pass
