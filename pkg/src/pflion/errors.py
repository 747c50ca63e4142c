"""Exception hierarchy shared by all modules."""


class PflionError(Exception):
    """Base class for errors raised by pflion."""


class InvalidParameterError(PflionError, ValueError):
    """An input is non-positive, non-finite or otherwise out of range."""


class NoPhaseContrastError(InvalidParameterError):
    """Substrate index <= 1: an etch step cannot produce a phase delay."""


class AliasingError(PflionError):
    """The pupil sampling cannot resolve the diffraction kernel."""


class ConvergenceError(PflionError, RuntimeError):
    """An iterative solver hit its iteration cap.

    The final residual is kept on ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FlatFieldError(PflionError, ValueError):
    """A fit region has zero variance."""


class SpotCountError(PflionError, ValueError):
    """The number of detected spots differs from what the analysis needs."""


class UnresolvableSpotsError(PflionError, ValueError):
    """Two spots overlap too much for independent fits."""


class ScenarioError(PflionError, ValueError):
    """A scenario file failed schema validation or could not be parsed."""


class FrameParseError(PflionError, ValueError):
    """A counts CSV could not be parsed; ``line`` and ``column`` are 1-based."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column
