"""Frame to contour signature to SAX word.

A frame is thresholded, the largest 8-connected silhouette is traced with
Moore-neighbour border following, and the distance from the filled
region's centroid is sampled at uniform arc length around the boundary.
In-plane rotation of the silhouette becomes a circular shift of that
series, which the rotation-invariant word distance absorbs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .errors import DegenerateShape, EmptyScene, InvalidInput, TooSmall
from .imageio import as_gray
from .sax import SaxParams, SaxWord, sax_word, znormalize

MIN_CONTOUR_POINTS = 8
MIN_SAMPLES = 16


class Polarity(str, Enum):
    DARK_FG = "dark_fg"
    LIGHT_FG = "light_fg"


@dataclass(frozen=True)
class PipelineConfig:
    threshold: int = 128
    polarity: Polarity = Polarity.DARK_FG
    samples: int = 360
    sax: SaxParams = field(default_factory=SaxParams)
    # std/mean of the raw signature below which the shape is too round to
    # carry a usable word; rasterised discs sit near 0.005, a square at 0.11
    min_relative_spread: float = 0.03

    def __post_init__(self):
        if not 0 <= self.threshold <= 255:
            raise InvalidInput(f"threshold must be in [0, 255], got {self.threshold}")
        object.__setattr__(self, "polarity", Polarity(self.polarity))
        if self.samples < MIN_SAMPLES:
            raise InvalidInput(f"need at least {MIN_SAMPLES} samples, got {self.samples}")
        if self.sax.w > self.samples:
            raise InvalidInput("word length exceeds signature length")
        if self.min_relative_spread < 0:
            raise InvalidInput("min_relative_spread must be >= 0")


@dataclass(frozen=True, eq=False)
class Contour:
    """Closed clockwise boundary; ``points`` are integer ``(x, y)`` rows
    starting at the component's top-most, left-most pixel."""

    points: np.ndarray
    area: int = 0
    centroid: tuple = (np.nan, np.nan)

    def __len__(self):
        return len(self.points)

    @property
    def perimeter(self) -> float:
        closed = np.vstack([self.points, self.points[:1]])
        return float(np.hypot(*np.diff(closed, axis=0).T).sum())


@dataclass(frozen=True, eq=False)
class Signature:
    samples: np.ndarray
    centroid: tuple

    def __len__(self):
        return len(self.samples)


def binarize(img, threshold: int = 128, polarity=Polarity.DARK_FG) -> np.ndarray:
    """Foreground mask as uint8 (1 = silhouette)."""
    gray = as_gray(img)
    if Polarity(polarity) is Polarity.DARK_FG:
        return (gray < threshold).view(np.uint8)
    return (gray >= threshold).view(np.uint8)


def largest_contour(binary) -> Contour:
    mask = np.ascontiguousarray(binary, dtype=np.uint8)
    area, sum_x, sum_y, sy, sx = kernels.largest_component(mask)
    if area == 0:
        raise EmptyScene("no foreground pixels")
    points = kernels.trace_boundary(mask, sy, sx, area)
    if len(points) < MIN_CONTOUR_POINTS:
        raise TooSmall(f"largest component boundary has {len(points)} points")
    return Contour(points, int(area), (sum_x / area, sum_y / area))


def region_centroid(binary, component=None) -> tuple:
    """Mean ``(x, y)`` of the pixels in ``component``.

    ``component`` may be a boolean mask over ``binary``, a :class:`Contour`
    produced by :func:`largest_contour`, or ``None`` for the largest
    component.
    """
    if isinstance(component, Contour):
        if component.area > 0:
            return component.centroid
        component = None
    if component is None:
        area, sum_x, sum_y, _, _ = kernels.largest_component(
            np.ascontiguousarray(binary, dtype=np.uint8))
        if area == 0:
            raise EmptyScene("no foreground pixels")
        return (sum_x / area, sum_y / area)
    member = np.asarray(component, dtype=bool) & np.asarray(binary, dtype=bool)
    ys, xs = np.nonzero(member)
    if xs.size == 0:
        raise EmptyScene("component has no pixels")
    return (float(xs.mean()), float(ys.mean()))


def distance_signature(contour: Contour, centroid, n: int = 360) -> Signature:
    """Centroid distance at ``n`` points spaced evenly along the closed boundary."""
    if n < MIN_SAMPLES:
        raise InvalidInput(f"need at least {MIN_SAMPLES} samples, got {n}")
    pts = np.asarray(contour.points if isinstance(contour, Contour) else contour,
                     dtype=np.float64)
    closed = np.vstack([pts, pts[:1]])
    steps = np.hypot(*np.diff(closed, axis=0).T)
    arc = np.concatenate(([0.0], np.cumsum(steps)))
    length = arc[-1]
    if length < 1e-9:
        raise TooSmall("contour has zero length")
    at = np.arange(n) * (length / n)
    x = np.interp(at, arc, closed[:, 0])
    y = np.interp(at, arc, closed[:, 1])
    cx, cy = centroid
    out = np.hypot(x - cx, y - cy)
    out.flags.writeable = False
    return Signature(out, (float(cx), float(cy)))


def image_to_word(img, cfg: PipelineConfig | None = None) -> tuple[SaxWord, Signature]:
    """Run the full pipeline on one frame.

    Raises :class:`EmptyScene`, :class:`TooSmall` or :class:`DegenerateShape`
    (all :class:`NoShapeError`) when the frame carries no usable silhouette.
    """
    cfg = cfg or PipelineConfig()
    binary = binarize(img, cfg.threshold, cfg.polarity)
    contour = largest_contour(binary)
    sig = distance_signature(contour, contour.centroid, cfg.samples)
    mean = sig.samples.mean()
    if mean <= 0 or sig.samples.std() / mean < cfg.min_relative_spread:
        raise DegenerateShape("signature is nearly constant")
    norm = znormalize(sig.samples)
    if norm.degenerate:
        raise DegenerateShape("signature has zero variance")
    return sax_word(norm.values, cfg.sax), sig
