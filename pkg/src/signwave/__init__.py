"""Recognise arm signs from a drone camera and negotiate access with a person.

Frames become a silhouette contour, the contour becomes a centroid-distance
series, and the series becomes a SAX word matched against enrolled
templates under rotation.
"""
__version__ = "0.1.0"

from ._jit import BACKEND  # noqa: E402
from .errors import (  # noqa: E402
    CorpusIOError, DegenerateShape, EmptyScene, FrameOverflow, InvalidInput, NoShapeError,
    SignwaveError, TooSmall,
)
from .recognizer import (  # noqa: E402
    Match, NoMatch, NoShape, Template, TemplateDB, enroll, match_word, pairwise_uniqueness,
    recognize, sweep,
)
from .sax import SaxParams, SaxWord, mindist, rotation_min_dist, sax_word  # noqa: E402
from .signature import PipelineConfig, Polarity, image_to_word  # noqa: E402
from .signs import ATTENTION, CANONICAL_SIGNS, NO, YES  # noqa: E402

__all__ = [
    "ATTENTION", "BACKEND", "CANONICAL_SIGNS", "CorpusIOError", "DegenerateShape", "EmptyScene",
    "FrameOverflow", "InvalidInput", "Match", "NO", "NoMatch", "NoShape", "NoShapeError",
    "PipelineConfig", "Polarity", "SaxParams", "SaxWord", "SignwaveError", "Template",
    "TemplateDB", "TooSmall", "YES", "enroll", "image_to_word", "match_word", "mindist",
    "pairwise_uniqueness", "recognize", "rotation_min_dist", "sax_word", "sweep",
]
