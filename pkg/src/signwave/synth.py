"""Deterministic stick-figure renderer for the three marshalling signs.

The figure is flat: a skeleton in a vertical body plane, drawn as capsules
of fixed width plus a filled torso quad and a round head.  Relative azimuth
squeezes the horizontal body axis by ``|cos(azimuth)|``, the camera pitch
``atan(altitude / distance)`` tilts the figure's vertical axis in the image
by that angle, and apparent size falls off with slant range.  Limb width
is never foreshortened, so an edge-on figure keeps a visible sliver.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import CorpusIOError, FrameOverflow, InvalidInput
from .imageio import write_pgm
from .signs import ATTENTION, CANONICAL_SIGNS, NO, YES, canonical_sign

BACKGROUND = 235
FOREGROUND = 25
# pixels per metre at one metre of slant range, for a 480-row frame
FOCAL_PX = 600.0
REFERENCE_ROWS = 480
LIMB_WIDTH_FRACTION = 0.08
MANIFEST_NAME = "manifest.csv"
MANIFEST_HEADER = ("file", "sign", "azimuth", "distance_m", "altitude_m", "seed")


@dataclass(frozen=True)
class Arm:
    """Shoulder angle from horizontal-outward (+90 = straight up, -90 =
    hanging) and the forearm's bend relative to the upper arm, degrees."""

    shoulder: float
    elbow: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.shoulder <= 180.0:
            raise InvalidInput(f"shoulder angle {self.shoulder} outside [-90, 180]")
        if not -150.0 <= self.elbow <= 150.0:
            raise InvalidInput(f"elbow bend {self.elbow} outside [-150, 150]")


@dataclass(frozen=True)
class PoseSpec:
    sign: str
    right: Arm
    left: Arm
    leg_spread: float = 6.0
    body_height: float = 1.75

    def __post_init__(self):
        if self.body_height <= 0:
            raise InvalidInput("body height must be positive")
        if not 0.0 <= self.leg_spread <= 45.0:
            raise InvalidInput("leg spread must be within [0, 45] degrees")


DEFAULT_POSES = {
    YES: PoseSpec(YES, right=Arm(45.0), left=Arm(45.0)),
    NO: PoseSpec(NO, right=Arm(45.0), left=Arm(-45.0)),
    # the forward-raised arm of the real sign cannot leave a flat figure's
    # plane, so it is drawn level and sideways; the other arm hangs
    ATTENTION: PoseSpec(ATTENTION, right=Arm(0.0), left=Arm(-80.0)),
}


def default_pose(sign: str) -> PoseSpec:
    sign = canonical_sign(sign)
    try:
        return DEFAULT_POSES[sign]
    except KeyError:
        raise InvalidInput(f"no default pose for sign {sign!r}") from None


@dataclass(frozen=True)
class ViewSpec:
    azimuth: float = 0.0
    distance_m: float = 3.0
    altitude_m: float = 5.0
    width: int = 640
    height: int = 480
    noise: float = 0.0

    def __post_init__(self):
        if not self.distance_m > 0:
            raise InvalidInput("distance must be positive")
        if self.altitude_m < 0:
            raise InvalidInput("altitude must be non-negative")
        if not 0.0 <= self.azimuth < 360.0:
            raise InvalidInput(f"azimuth {self.azimuth} outside [0, 360)")
        if min(self.width, self.height) < 64:
            raise InvalidInput("image sides must be at least 64 pixels")
        if self.noise < 0:
            raise InvalidInput("noise amplitude must be non-negative")

    @property
    def slant_range(self) -> float:
        return math.hypot(self.distance_m, self.altitude_m)

    @property
    def pitch(self) -> float:
        """Camera depression angle in radians."""
        return math.atan2(self.altitude_m, self.distance_m)

    @property
    def pixels_per_metre(self) -> float:
        return FOCAL_PX * (self.height / REFERENCE_ROWS) / self.slant_range


def _skeleton(pose: PoseSpec):
    """Body-plane geometry in metres: ``(capsules, quad, head)``.

    ``u`` runs to the signaller's left (image right when facing the camera),
    ``v`` runs up from the feet.  Segment lengths are Drillis-Contini
    fractions of body height.
    """
    H = pose.body_height
    neck = (0.0, 0.845 * H)
    pelvis = (0.0, 0.53 * H)
    sh = {s: (s * 0.11 * H, 0.818 * H) for s in (-1, +1)}
    hip = {s: (s * 0.06 * H, 0.53 * H) for s in (-1, +1)}
    upper, fore, leg = 0.186 * H, 0.254 * H, 0.50 * H
    capsules = [(neck, pelvis), (sh[-1], sh[+1]), (hip[-1], hip[+1])]
    for side, arm in ((-1, pose.right), (+1, pose.left)):
        a1 = math.radians(arm.shoulder)
        elbow = (sh[side][0] + side * upper * math.cos(a1), sh[side][1] + upper * math.sin(a1))
        a2 = math.radians(arm.shoulder + arm.elbow)
        hand = (elbow[0] + side * fore * math.cos(a2), elbow[1] + fore * math.sin(a2))
        capsules += [(sh[side], elbow), (elbow, hand)]
    spread = math.radians(pose.leg_spread)
    for side in (-1, +1):
        foot = (hip[side][0] + side * leg * math.sin(spread), hip[side][1] - leg * math.cos(spread))
        capsules.append((hip[side], foot))
    quad = [sh[-1], sh[+1], hip[+1], hip[-1]]
    head = ((0.0, 0.935 * H), 0.065 * H)
    return capsules, quad, head


def _fill_capsule(canvas, p0, p1, radius):
    h, w = canvas.shape
    x0 = max(int(math.floor(min(p0[0], p1[0]) - radius)), 0)
    x1 = min(int(math.ceil(max(p0[0], p1[0]) + radius)), w - 1)
    y0 = max(int(math.floor(min(p0[1], p1[1]) - radius)), 0)
    y1 = min(int(math.ceil(max(p0[1], p1[1]) + radius)), h - 1)
    if x1 < x0 or y1 < y0:
        return
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1].astype(np.float64)
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    seg2 = dx * dx + dy * dy
    if seg2 > 0:
        t = np.clip(((xs - p0[0]) * dx + (ys - p0[1]) * dy) / seg2, 0.0, 1.0)
    else:
        t = 0.0
    d2 = (xs - p0[0] - t * dx) ** 2 + (ys - p0[1] - t * dy) ** 2
    canvas[y0:y1 + 1, x0:x1 + 1] |= d2 <= radius * radius


def _fill_convex(canvas, corners):
    h, w = canvas.shape
    pts = np.asarray(corners, dtype=np.float64)
    x0 = max(int(math.floor(pts[:, 0].min())), 0)
    x1 = min(int(math.ceil(pts[:, 0].max())), w - 1)
    y0 = max(int(math.floor(pts[:, 1].min())), 0)
    y1 = min(int(math.ceil(pts[:, 1].max())), h - 1)
    if x1 < x0 or y1 < y0:
        return
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1].astype(np.float64)
    cross = []
    for i in range(len(pts)):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % len(pts)]
        cross.append((bx - ax) * (ys - ay) - (by - ay) * (xs - ax))
    cross = np.stack(cross)
    inside = np.all(cross >= -1e-9, axis=0) | np.all(cross <= 1e-9, axis=0)
    canvas[y0:y1 + 1, x0:x1 + 1] |= inside


def render_mask(pose: PoseSpec, view: ViewSpec, seed: int = 0) -> np.ndarray:
    """Boolean silhouette mask, ``True`` on the figure."""
    capsules, quad, (head_c, head_r) = _skeleton(pose)
    squeeze = abs(math.cos(math.radians(view.azimuth)))
    ppm = view.pixels_per_metre
    cos_t, sin_t = math.cos(view.pitch), math.sin(view.pitch)
    radius = 0.5 * LIMB_WIDTH_FRACTION * pose.body_height * ppm
    head_px = head_r * ppm

    def project(p):
        # foreshorten across the body, tilt the vertical axis, flip to image rows
        u, v = p[0] * squeeze, p[1]
        return ((u * cos_t + v * sin_t) * ppm, (u * sin_t - v * cos_t) * ppm)

    cap_px = [(project(a), project(b)) for a, b in capsules]
    quad_px = [project(p) for p in quad]
    head_px_c = project(head_c)

    if view.noise > 0:
        rng = np.random.default_rng(seed)
        jitter = rng.uniform(-view.noise, view.noise, size=(len(cap_px), 2, 2))
        cap_px = [((a[0] + j[0, 0], a[1] + j[0, 1]), (b[0] + j[1, 0], b[1] + j[1, 1]))
                  for (a, b), j in zip(cap_px, jitter)]

    pts = np.array([p for seg in cap_px for p in seg])
    lo = np.minimum(pts.min(axis=0) - radius, [head_px_c[0] - head_px, head_px_c[1] - head_px])
    hi = np.maximum(pts.max(axis=0) + radius, [head_px_c[0] + head_px, head_px_c[1] + head_px])
    # centre the figure's bounding box in the frame
    off = np.array([(view.width - 1) / 2.0, (view.height - 1) / 2.0]) - (lo + hi) / 2.0
    if np.any(lo + off < 0) or hi[0] + off[0] > view.width - 1 or hi[1] + off[1] > view.height - 1:
        raise FrameOverflow(
            f"figure spans {hi - lo} px, frame is {view.width}x{view.height}"
        )

    def shift(p):
        return (p[0] + off[0], p[1] + off[1])

    canvas = np.zeros((view.height, view.width), dtype=bool)
    _fill_convex(canvas, [shift(p) for p in quad_px])
    for a, b in cap_px:
        _fill_capsule(canvas, shift(a), shift(b), radius)
    c = shift(head_px_c)
    _fill_capsule(canvas, c, c, head_px)
    return canvas


def render_sign(pose: PoseSpec | str, view: ViewSpec | None = None, seed: int = 0) -> np.ndarray:
    """Dark silhouette on a light background as a uint8 frame."""
    if isinstance(pose, str):
        pose = default_pose(pose)
    view = view or ViewSpec()
    mask = render_mask(pose, view, seed)
    return np.where(mask, FOREGROUND, BACKGROUND).astype(np.uint8)


def rotate_frame(img, degrees: float, fill: int = BACKGROUND) -> np.ndarray:
    """Rotate a frame counter-clockwise about its centre, growing the canvas
    so nothing is cropped.  Quarter turns are exact pixel permutations."""
    img = np.asarray(img, dtype=np.uint8)
    quarter = degrees / 90.0
    if float(quarter).is_integer():
        return np.ascontiguousarray(np.rot90(img, int(quarter) % 4))
    out = ndimage.rotate(img, degrees, reshape=True, order=0, mode="constant", cval=fill)
    return np.ascontiguousarray(out.astype(np.uint8))


@dataclass(frozen=True)
class ManifestRow:
    file: str
    sign: str
    azimuth: float
    distance_m: float
    altitude_m: float
    seed: int


@dataclass
class CorpusManifest:
    rows: list = field(default_factory=list)
    base_dir: Path = Path(".")

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def path_of(self, row: ManifestRow) -> Path:
        p = Path(row.file)
        return p if p.is_absolute() else self.base_dir / p


def _fmt(x: float) -> str:
    return repr(float(x))


def write_manifest(manifest: CorpusManifest, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for r in manifest.rows:
            writer.writerow([r.file, r.sign, _fmt(r.azimuth), _fmt(r.distance_m),
                             _fmt(r.altitude_m), r.seed])


def read_manifest(path) -> CorpusManifest:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise InvalidInput(f"manifest {path} lacks columns {sorted(missing)}")
        rows = [
            ManifestRow(
                file=rec["file"],
                sign=canonical_sign(rec["sign"]),
                azimuth=float(rec["azimuth"]),
                distance_m=float(rec["distance_m"]),
                altitude_m=float(rec["altitude_m"]),
                seed=int(rec["seed"]),
            )
            for rec in reader
        ]
    return CorpusManifest(rows, path.parent)


def corpus_filename(sign: str, azimuth: float, altitude: float, distance: float) -> str:
    return f"{sign}_az{azimuth:05.1f}_alt{altitude:.1f}_d{distance:.1f}.pgm"


def generate_corpus(signs=CANONICAL_SIGNS, azimuths=(), altitudes=(5.0,), distance: float = 3.0,
                    out_dir=".", seed: int = 0, noise: float = 0.0,
                    width: int = 640, height: int = 480) -> CorpusManifest:
    """Render one PGM per (sign, azimuth, altitude) cell and write ``manifest.csv``.

    Row ``i`` is rendered with seed ``seed + i``.  Re-running with the same
    arguments reproduces every byte.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError(f"{out} is not writable")
    except OSError as exc:
        raise CorpusIOError(f"cannot write corpus to {out}: {exc}") from exc

    rows = []
    for sign in (canonical_sign(s) for s in signs):
        pose = default_pose(sign)
        for az in azimuths:
            for alt in altitudes:
                row_seed = seed + len(rows)
                view = ViewSpec(azimuth=float(az) % 360.0, distance_m=distance,
                                altitude_m=float(alt), width=width, height=height, noise=noise)
                name = corpus_filename(sign, view.azimuth, view.altitude_m, distance)
                try:
                    write_pgm(out / name, render_sign(pose, view, row_seed))
                except OSError as exc:
                    raise CorpusIOError(f"cannot write {out / name}: {exc}") from exc
                rows.append(ManifestRow(name, sign, view.azimuth, float(distance),
                                        view.altitude_m, row_seed))
    manifest = CorpusManifest(rows, out)
    try:
        write_manifest(manifest, out / MANIFEST_NAME)
    except OSError as exc:
        raise CorpusIOError(f"cannot write manifest: {exc}") from exc
    return manifest
