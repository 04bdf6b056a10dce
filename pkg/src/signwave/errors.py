"""Exception hierarchy shared by every signwave module."""


class SignwaveError(Exception):
    """Base class for all library errors."""


class InvalidInput(SignwaveError, ValueError):
    pass


class NoShapeError(SignwaveError):
    """The frame did not yield a usable silhouette.

    ``reason`` is the machine-readable token printed by the CLI.
    """

    reason = "no_shape"


class EmptyScene(NoShapeError):
    reason = "empty_scene"


class TooSmall(NoShapeError):
    reason = "too_small"


class DegenerateShape(NoShapeError):
    reason = "degenerate"


class FrameOverflow(SignwaveError):
    """A rendered figure does not fit inside the requested frame."""


class CorpusIOError(SignwaveError, OSError):
    pass
