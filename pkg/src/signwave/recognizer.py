"""Template database of enrolled sign words and rotation-invariant matching.

A database holds one or more SAX words per sign.  A frame is recognised as
the sign of its nearest template (rotation-invariant MINDIST) when that
distance is within the rejection threshold ``theta``; otherwise the result
is a :class:`NoMatch`.  Unless fixed explicitly, ``theta`` is half the
smallest distance between templates of different signs and is recomputed
whenever the database changes.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import InvalidInput, NoShapeError
from .imageio import read_image
from .sax import SaxParams, SaxWord, dist_table, rotation_min_dist
from .signature import PipelineConfig, Polarity, image_to_word
from .signs import canonical_sign

log = logging.getLogger(__name__)

DB_MAGIC = "saxdb"
DB_VERSION = 1
THETA_FRACTION = 0.5
PASS_RATE = 0.9


@dataclass(frozen=True)
class Template:
    sign: str
    word: SaxWord
    azimuth: Optional[float] = None
    distance_m: Optional[float] = None
    altitude_m: Optional[float] = None
    file: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class TemplateDB:
    params: SaxParams = field(default_factory=SaxParams)
    samples: int = 360
    templates: tuple = ()
    theta_override: Optional[float] = None

    def __post_init__(self):
        if self.params.w > self.samples:
            raise InvalidInput("word length exceeds signature length")
        if self.theta_override is not None and not self.theta_override >= 0:
            raise InvalidInput("theta must be non-negative")
        for t in self.templates:
            if t.word.params != self.params or t.word.source_length != self.samples:
                raise InvalidInput(f"template for {t.sign} does not match database params")

    def __len__(self):
        return len(self.templates)

    @property
    def signs(self) -> list:
        """Distinct sign names in enrollment order."""
        return list(dict.fromkeys(t.sign for t in self.templates))

    @cached_property
    def auto_theta(self) -> float:
        gaps = [
            rotation_min_dist(a.word, b.word)[0]
            for a, b in combinations(self.templates, 2)
            if a.sign != b.sign
        ]
        return THETA_FRACTION * min(gaps) if gaps else math.inf

    @property
    def theta(self) -> float:
        return self.auto_theta if self.theta_override is None else self.theta_override

    @cached_property
    def _template_symbols(self) -> np.ndarray:
        return np.array([t.word.symbols for t in self.templates], dtype=np.intp)

    def pipeline_config(self, threshold: int = 128, polarity=Polarity.DARK_FG) -> PipelineConfig:
        return PipelineConfig(threshold=threshold, polarity=polarity,
                              samples=self.samples, sax=self.params)

    def with_theta(self, theta: Optional[float]) -> "TemplateDB":
        return replace(self, theta_override=theta)


@dataclass(frozen=True)
class Match:
    sign: str
    distance: float
    shift: int
    template: int = 0


@dataclass(frozen=True)
class NoMatch:
    best_distance: float
    nearest: Optional[str] = None


@dataclass(frozen=True)
class NoShape:
    reason: str


MatchResult = Union[Match, NoMatch, NoShape]


def add_template(db: TemplateDB, template: Template) -> TemplateDB:
    """Append ``template`` unless the same sign already has an identical word."""
    for t in db.templates:
        if t.sign == template.sign and t.word == template.word:
            log.warning("duplicate template for %s (%s) ignored", template.sign, template.word)
            return db
    return replace(db, templates=db.templates + (template,))


def enroll(img, sign: str, db: TemplateDB, *, azimuth=None, distance_m=None,
           altitude_m=None, file=None, threshold: int = 128,
           polarity=Polarity.DARK_FG) -> TemplateDB:
    """Return a new database with ``img`` enrolled as ``sign``.

    Pipeline failures propagate as :class:`NoShapeError`; the input database
    is never modified.
    """
    word, _ = image_to_word(img, db.pipeline_config(threshold, polarity))
    return add_template(db, Template(canonical_sign(sign), word, azimuth, distance_m,
                                     altitude_m, file))


def _all_distances(word: SaxWord, db: TemplateDB):
    """Rotation-min distance and best shift of ``word`` against every template."""
    w = db.params.w
    table = dist_table(db.params.a)
    us = word.as_array()
    shifted = us[(np.arange(w)[None, :] - np.arange(w)[:, None]) % w]  # (shift, pos)
    cells = table[shifted[None, :, :] - 1, db._template_symbols[:, None, :] - 1]
    dists = np.sqrt(db.samples / w) * np.sqrt(np.sum(cells * cells, axis=2))
    mismatch = np.count_nonzero(shifted[None, :, :] != db._template_symbols[:, None, :], axis=2)
    best = np.empty(len(db), dtype=np.float64)
    shifts = np.empty(len(db), dtype=np.intp)
    idx = np.arange(w)
    for i in range(len(db)):
        k = np.lexsort((idx, mismatch[i], np.round(dists[i], 12)))[0]
        best[i] = dists[i, k]
        shifts[i] = k
    return best, shifts


def match_word(word: SaxWord, db: TemplateDB) -> MatchResult:
    if len(db) == 0:
        raise InvalidInput("template database is empty")
    if word.params != db.params or word.source_length != db.samples:
        raise InvalidInput("word does not match database params")
    dists, shifts = _all_distances(word, db)
    # argmin returns the first minimum, i.e. the earliest enrolled template
    i = int(np.argmin(np.round(dists, 12)))
    best = float(dists[i])
    if best <= db.theta:
        return Match(db.templates[i].sign, best, int(shifts[i]), i)
    return NoMatch(best, db.templates[i].sign)


def recognize(img, db: TemplateDB, threshold: int = 128, polarity=Polarity.DARK_FG) -> MatchResult:
    if len(db) == 0:
        raise InvalidInput("template database is empty")
    try:
        word, _ = image_to_word(img, db.pipeline_config(threshold, polarity))
    except NoShapeError as exc:
        return NoShape(exc.reason)
    return match_word(word, db)


# -- uniqueness ---------------------------------------------------------------

@dataclass(frozen=True)
class PairReport:
    first: int
    second: int
    first_sign: str
    second_sign: str
    distinct: bool
    distance: float
    shift: int


@dataclass(frozen=True)
class UniquenessReport:
    pairs: tuple
    min_distance: float

    @property
    def all_distinct(self) -> bool:
        return all(p.distinct for p in self.pairs)


def pairwise_uniqueness(db: TemplateDB) -> UniquenessReport:
    """Compare every pair of templates that belong to different signs."""
    if len(db.signs) < 2:
        raise InvalidInput("need templates for at least two signs")
    pairs = []
    for (i, a), (j, b) in combinations(enumerate(db.templates), 2):
        if a.sign == b.sign:
            continue
        d, k = rotation_min_dist(a.word, b.word)
        pairs.append(PairReport(i, j, a.sign, b.sign, a.word.symbols != b.word.symbols, d, k))
    return UniquenessReport(tuple(pairs), min(p.distance for p in pairs))


# -- sweep ----------------------------------------------------------------------

@dataclass
class CellStats:
    attempts: int = 0
    correct: int = 0
    distance_sum: float = 0.0
    distance_count: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.attempts if self.attempts else math.nan

    @property
    def mean_distance(self) -> float:
        return self.distance_sum / self.distance_count if self.distance_count else math.nan


@dataclass
class SweepReport:
    bin_width: float = 5.0
    # (sign, azimuth_bin, altitude_m) -> CellStats, in first-seen order
    cells: dict = field(default_factory=dict)
    # (manifest row, message)
    errors: list = field(default_factory=list)

    def azimuth_table(self, sign: str) -> list:
        """``(azimuth_bin, attempts, correct)`` pooled over altitudes, sorted."""
        pooled = {}
        for (s, az, _), c in self.cells.items():
            if s != sign:
                continue
            a, k = pooled.get(az, (0, 0))
            pooled[az] = (a + c.attempts, k + c.correct)
        return [(az, a, k) for az, (a, k) in sorted(pooled.items())]

    def boundary(self, sign: str, pass_rate: float = PASS_RATE) -> Optional[float]:
        """Largest azimuth bin reached from the first bin without dropping
        below ``pass_rate`` correct; ``None`` if the first bin fails."""
        last = None
        for az, attempts, correct in self.azimuth_table(sign):
            if attempts == 0 or correct / attempts < pass_rate:
                break
            last = az
        return last

    @property
    def signs(self) -> list:
        return list(dict.fromkeys(s for s, _, _ in self.cells))


def _sweep_one(path, db, threshold, polarity):
    try:
        img = read_image(path)
    except (OSError, InvalidInput) as exc:
        return None, f"{type(exc).__name__}: {exc}"
    return recognize(img, db, threshold, polarity), None


def sweep(db: TemplateDB, manifest, bin_width: float = 5.0, threshold: int = 128,
          polarity=Polarity.DARK_FG, workers: int = 1) -> SweepReport:
    """Recognise every manifest row and tabulate correctness per cell.

    Unreadable rows are recorded in ``errors`` and skipped.  With
    ``workers > 1`` frames are processed concurrently; results are merged in
    manifest order so the report is identical either way.
    """
    if bin_width <= 0:
        raise InvalidInput("bin width must be positive")
    report = SweepReport(bin_width)
    rows = list(manifest)
    if not rows:
        return report
    paths = [manifest.path_of(r) for r in rows]

    def job(p):
        return _sweep_one(p, db, threshold, polarity)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, paths))
    else:
        results = [job(p) for p in paths]

    for row, (result, error) in zip(rows, results):
        if error is not None:
            report.errors.append((row, error))
            continue
        az_bin = math.floor(row.azimuth / bin_width) * bin_width
        key = (row.sign, float(az_bin), float(row.altitude_m))
        cell = report.cells.setdefault(key, CellStats())
        cell.attempts += 1
        if isinstance(result, Match):
            cell.correct += result.sign == row.sign
            cell.distance_sum += result.distance
            cell.distance_count += 1
        elif isinstance(result, NoMatch):
            cell.distance_sum += result.best_distance
            cell.distance_count += 1
    return report


# -- saxdb text format ------------------------------------------------------------

def _fmt(x: Optional[float]) -> str:
    return "nan" if x is None else repr(float(x))


def _parse_opt(token: str) -> Optional[float]:
    value = float(token)
    return None if math.isnan(value) else value


def dumps(db: TemplateDB) -> str:
    lines = [f"{DB_MAGIC} {DB_VERSION} {db.samples} {db.params.w} {db.params.a} {_fmt(db.theta)}"]
    for t in db.templates:
        lines.append("\t".join([t.sign, _fmt(t.azimuth), _fmt(t.distance_m),
                                _fmt(t.altitude_m), str(t.word)]))
    return "\n".join(lines) + "\n"


def loads(text: str) -> TemplateDB:
    lines = text.splitlines()
    if not lines:
        raise InvalidInput("empty saxdb")
    head = lines[0].split()
    if len(head) != 6 or head[0] != DB_MAGIC:
        raise InvalidInput(f"bad saxdb header: {lines[0]!r}")
    if int(head[1]) != DB_VERSION:
        raise InvalidInput(f"unsupported saxdb version {head[1]}")
    samples, w, a = int(head[2]), int(head[3]), int(head[4])
    params = SaxParams(w, a)
    templates = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise InvalidInput(f"saxdb line {lineno}: expected 5 tab-separated fields")
        sign, az, dist, alt, word = parts
        sw = SaxWord.from_string(word, a, samples)
        if sw.params != params:
            raise InvalidInput(f"saxdb line {lineno}: word length {len(word)} != {w}")
        templates.append(Template(canonical_sign(sign), sw, _parse_opt(az),
                                  _parse_opt(dist), _parse_opt(alt)))
    db = TemplateDB(params, samples, tuple(templates))
    # a theta that equals the derived one stays derived, so enrolling more
    # signs into a loaded database keeps recalibrating it
    if head[5] != _fmt(db.auto_theta):
        db = db.with_theta(float(head[5]))
    return db


def save(db: TemplateDB, path) -> None:
    Path(path).write_text(dumps(db))


def load(path) -> TemplateDB:
    return loads(Path(path).read_text())
