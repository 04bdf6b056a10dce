"""Symbolic aggregate approximation of real-valued series.

The pipeline is z-normalisation, piecewise aggregate approximation (PAA)
and Gaussian-quantile bucketing into a word over ``a`` letters.  Words are
compared with the lower-bounding MINDIST, optionally minimised over
circular shifts so that a rotated contour still matches.

Symbols are 1-based throughout (``1 .. a``); letter ``'a'`` is symbol 1.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput

DEGENERATE_STD = 1e-9
MAX_ALPHABET = 26

__all__ = [
    "SaxParams",
    "SaxWord",
    "ZNorm",
    "znormalize",
    "paa",
    "breakpoints",
    "sax_word",
    "symbol_dist",
    "dist_table",
    "mindist",
    "rotate",
    "rotation_min_dist",
    "exact_match",
]


class ZNorm(NamedTuple):
    values: np.ndarray
    degenerate: bool


@dataclass(frozen=True)
class SaxParams:
    # 60 segments of a 360-sample contour: one symbol per 6 degrees of boundary
    w: int = 60
    a: int = 6

    def __post_init__(self):
        if int(self.w) != self.w or self.w < 1:
            raise InvalidInput(f"word length must be a positive integer, got {self.w!r}")
        if int(self.a) != self.a or not 2 <= self.a <= MAX_ALPHABET:
            raise InvalidInput(f"alphabet size must be in [2, {MAX_ALPHABET}], got {self.a!r}")


@dataclass(frozen=True)
class SaxWord:
    symbols: tuple
    params: SaxParams
    source_length: int

    def __post_init__(self):
        if len(self.symbols) != self.params.w:
            raise InvalidInput(
                f"word has {len(self.symbols)} symbols, params say w={self.params.w}"
            )
        if any(s < 1 or s > self.params.a for s in self.symbols):
            raise InvalidInput(f"symbols must lie in [1, {self.params.a}]")
        if self.source_length < self.params.w:
            raise InvalidInput("source length shorter than word")

    def __str__(self):
        return "".join(string.ascii_lowercase[s - 1] for s in self.symbols)

    @classmethod
    def from_string(cls, text: str, a: int, source_length: int) -> "SaxWord":
        text = text.strip()
        if not text or not all(c in string.ascii_lowercase for c in text):
            raise InvalidInput(f"not a lowercase SAX word: {text!r}")
        symbols = tuple(ord(c) - ord("a") + 1 for c in text)
        return cls(symbols, SaxParams(len(symbols), a), source_length)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.symbols, dtype=np.intp)


def _as_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInput("series must be one-dimensional")
    if x.size == 0:
        raise InvalidInput("series is empty")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("series contains non-finite samples")
    return x


def znormalize(series) -> ZNorm:
    """Shift to zero mean and scale to unit population standard deviation.

    A series whose std is below ``DEGENERATE_STD`` comes back as all zeros
    with ``degenerate=True`` instead of raising.
    """
    x = _as_series(series)
    mu = x.mean()
    sigma = x.std()
    if sigma < DEGENERATE_STD:
        out = np.zeros_like(x)
        degenerate = True
    else:
        out = (x - mu) / sigma
        degenerate = False
    out.flags.writeable = False
    return ZNorm(out, degenerate)


def paa(series, w: int) -> np.ndarray:
    """Piecewise aggregate approximation with fractional segment edges.

    Segment ``j`` averages the step function of ``series`` over the
    interval ``[j*n/w, (j+1)*n/w)``, so ``w`` need not divide ``n``.
    """
    x = _as_series(series)
    n = x.size
    if int(w) != w or w < 1 or w > n:
        raise InvalidInput(f"PAA needs 1 <= w <= n (n={n}), got w={w}")
    w = int(w)
    if n % w == 0:
        return x.reshape(w, n // w).mean(axis=1)
    # integral of the step function evaluated at the fractional segment edges
    cum = np.concatenate(([0.0], np.cumsum(x)))
    edges = np.arange(w + 1) * (n / w)
    whole = np.floor(edges).astype(np.intp)
    frac = edges - whole
    tail = np.where(whole < n, x[np.minimum(whole, n - 1)], 0.0)
    area = cum[whole] + frac * tail
    return np.diff(area) * (w / n)


@lru_cache(maxsize=None)
def _breakpoints(a: int) -> tuple:
    dist = NormalDist()
    return tuple(dist.inv_cdf(i / a) for i in range(1, a))


def breakpoints(a: int) -> np.ndarray:
    """The ``a - 1`` standard-normal quantiles splitting the line into ``a``
    equiprobable regions."""
    if int(a) != a or not 2 <= a <= MAX_ALPHABET:
        raise InvalidInput(f"alphabet size must be in [2, {MAX_ALPHABET}], got {a!r}")
    out = np.array(_breakpoints(int(a)))
    if a % 2 == 0:
        out[a // 2 - 1] = 0.0
    return out


def sax_word(series, params: SaxParams) -> SaxWord:
    """Discretise an already z-normalised series.

    A value equal to a breakpoint is assigned the higher symbol.
    """
    x = _as_series(series)
    segments = paa(x, params.w)
    symbols = np.searchsorted(breakpoints(params.a), segments, side="right") + 1
    return SaxWord(tuple(int(s) for s in symbols), params, x.size)


@lru_cache(maxsize=None)
def _dist_table(a: int) -> np.ndarray:
    beta = breakpoints(a)
    table = np.zeros((a, a))
    for r in range(1, a + 1):
        for c in range(1, a + 1):
            if abs(r - c) > 1:
                table[r - 1, c - 1] = beta[max(r, c) - 2] - beta[min(r, c) - 1]
    table.flags.writeable = False
    return table


def dist_table(a: int) -> np.ndarray:
    """Read-only ``a x a`` symbol distance lookup (0-based indices)."""
    breakpoints(a)  # validates a
    return _dist_table(int(a))


def symbol_dist(r: int, c: int, a: int) -> float:
    if not (1 <= r <= a and 1 <= c <= a):
        raise InvalidInput(f"symbols {r}, {c} outside [1, {a}]")
    return float(dist_table(a)[r - 1, c - 1])


def _check_compatible(u: SaxWord, v: SaxWord):
    if u.params != v.params:
        raise InvalidInput(f"word params differ: {u.params} vs {v.params}")
    if u.source_length != v.source_length:
        raise InvalidInput(
            f"source lengths differ: {u.source_length} vs {v.source_length}"
        )


def mindist(u: SaxWord, v: SaxWord) -> float:
    _check_compatible(u, v)
    table = dist_table(u.params.a)
    cells = table[u.as_array() - 1, v.as_array() - 1]
    scale = np.sqrt(u.source_length / u.params.w)
    return float(scale * np.sqrt(np.sum(cells * cells)))


def rotate(u: SaxWord, k: int) -> SaxWord:
    """Circularly shift the word right by ``k`` positions."""
    return SaxWord(tuple(np.roll(u.symbols, k).tolist()), u.params, u.source_length)


def _shift_index(w: int) -> np.ndarray:
    # row k holds the source positions of np.roll(symbols, k)
    return (np.arange(w)[None, :] - np.arange(w)[:, None]) % w


def rotation_min_dist(u: SaxWord, v: SaxWord) -> tuple[float, int]:
    """Smallest MINDIST between ``v`` and any circular shift of ``u``.

    Returns ``(distance, shift)``.  Among equally distant shifts the one
    with the fewest mismatched symbols wins, then the smallest shift.
    """
    _check_compatible(u, v)
    dists, mismatches = _all_shift_dists(u.as_array(), v.as_array(), u.params, u.source_length)
    # rounding keeps summation-order noise from breaking genuine ties
    order = np.lexsort((np.arange(dists.size), mismatches, np.round(dists, 12)))
    k = int(order[0])
    return float(dists[k]), k


def _all_shift_dists(us: np.ndarray, vs: np.ndarray, params: SaxParams, n: int):
    table = dist_table(params.a)
    shifted = us[_shift_index(params.w)]
    cells = table[shifted - 1, vs[None, :] - 1]
    dists = np.sqrt(n / params.w) * np.sqrt(np.sum(cells * cells, axis=1))
    mismatches = np.count_nonzero(shifted != vs[None, :], axis=1)
    return dists, mismatches


def exact_match(u: SaxWord, v: SaxWord, rotation_invariant: bool = True) -> bool:
    """Exact string equality, optionally up to a circular shift."""
    _check_compatible(u, v)
    if not rotation_invariant:
        return u.symbols == v.symbols
    doubled = u.symbols + u.symbols
    w = len(v.symbols)
    return any(doubled[k:k + w] == v.symbols for k in range(w))

