"""Entropy-complexity plane coordinates from 2x2 ordinal patterns.

A grayscale image is symbolized by sliding a 2x2 window over it and recording,
for each window, which of the 24 orderings its four values realize (ties broken
by position, so flat regions map to the identity ordering). The normalized
Shannon entropy H of the resulting pattern distribution measures disorder; the
statistical complexity C weighs that entropy by the Jensen-Shannon distance
from the uniform distribution, so both constant images (H = 0) and pure noise
(distribution near uniform) score C near 0 while structured images score high.

Both coordinates are invariant under any strictly increasing remapping of the
pixel values, because only the orderings inside each window matter.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmall
from .imaging import GrayImage

PATTERN_COUNT = 24  # 4! orderings of a 2x2 window

# Rank vectors of all 24 permutations in lexicographic order; the identity
# (sorted window) is index 0 and the full reversal is index 23. The table maps
# a base-4 packing of the rank vector to its pattern index.
_RANK_TO_INDEX = np.full(256, -1, dtype=np.int64)
for _i, _p in enumerate(itertools.permutations(range(4))):
    _RANK_TO_INDEX[((_p[0] * 4 + _p[1]) * 4 + _p[2]) * 4 + _p[3]] = _i

# Maximum Jensen-Shannon divergence from the uniform distribution over n = 24
# bins, attained by a one-pattern distribution. Natural log throughout.
_N = PATTERN_COUNT
JS_DIVERGENCE_MAX = -0.5 * (
    (_N + 1) / _N * math.log(_N + 1) - 2.0 * math.log(2 * _N) + math.log(_N)
)


@dataclass(frozen=True, eq=False)
class OrdinalDistribution:
    """Counts over the 24 ordinal patterns; total is the window count."""

    counts: np.ndarray
    total: int

    def __post_init__(self):
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if counts.shape != (PATTERN_COUNT,):
            raise ValueError(f"expected {PATTERN_COUNT} bins, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("negative pattern count")
        if self.total != int(counts.sum()) or self.total < 1:
            raise ValueError("total must equal the sum of counts and be >= 1")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def probabilities(self) -> np.ndarray:
        return self.counts / self.total


@dataclass(frozen=True)
class ECPoint:
    """Coordinates in the entropy-complexity plane, both in [0, 1]."""

    h: float
    c: float


def _window_ranks(a, b, c, d):
    # Rank of each position = values strictly below it + equal values at
    # earlier positions; the stable tie-break keeps constant windows at the
    # identity pattern.
    r0 = (b < a).astype(np.int64) + (c < a) + (d < a)
    r1 = (a <= b).astype(np.int64) + (c < b) + (d < b)
    r2 = (a <= c).astype(np.int64) + (b <= c) + (d < c)
    r3 = (a <= d).astype(np.int64) + (b <= d) + (c <= d)
    return ((r0 * 4 + r1) * 4 + r2) * 4 + r3


def ordinal_pattern(window) -> int:
    """Pattern index in [0, 24) of a single window read row-major (a, b, c, d)."""
    a, b, c, d = (np.asarray(v) for v in window)
    return int(_RANK_TO_INDEX[int(_window_ranks(a, b, c, d))])


def pattern_distribution(img: GrayImage | np.ndarray, stride: int = 1) -> OrdinalDistribution:
    """Histogram of 2x2 ordinal patterns over all windows at the given stride.

    Accepts a GrayImage or any 2D numeric array. With stride 1 every
    overlapping window is sampled and total = (width-1) * (height-1).
    """
    g = img.pixels if isinstance(img, GrayImage) else np.asarray(img)
    if g.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {g.shape}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    h, w = g.shape
    if h < 2 or w < 2:
        raise ImageTooSmall(f"{w}x{h} image has no 2x2 window")

    if stride == 1:
        a, b = g[:-1, :-1], g[:-1, 1:]
        c, d = g[1:, :-1], g[1:, 1:]
    else:
        rows = np.arange(0, h - 1, stride)
        cols = np.arange(0, w - 1, stride)
        a = g[np.ix_(rows, cols)]
        b = g[np.ix_(rows, cols + 1)]
        c = g[np.ix_(rows + 1, cols)]
        d = g[np.ix_(rows + 1, cols + 1)]

    keys = _window_ranks(a, b, c, d)
    counts = np.bincount(_RANK_TO_INDEX[keys].ravel(), minlength=PATTERN_COUNT)
    return OrdinalDistribution(counts=counts, total=int(counts.sum()))


def _shannon(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def permutation_entropy(dist: OrdinalDistribution) -> float:
    """Shannon entropy of the pattern distribution, normalized by log 24.

    The normalizer is computed as the entropy of the uniform distribution
    through the same code path, so an exactly-uniform input scores exactly 1.
    """
    u = np.full(PATTERN_COUNT, 1.0 / PATTERN_COUNT)
    h = _shannon(dist.probabilities()) / _shannon(u)
    return min(1.0, max(0.0, h))


def js_divergence_to_uniform(dist: OrdinalDistribution) -> float:
    """Jensen-Shannon divergence between the distribution and uniform (nats).

    All three entropy terms share one code path so an exactly-uniform
    input cancels to exactly zero.
    """
    p = dist.probabilities()
    u = np.full(PATTERN_COUNT, 1.0 / PATTERN_COUNT)
    m = 0.5 * (p + u)
    return _shannon(m) - 0.5 * _shannon(p) - 0.5 * _shannon(u)


def statistical_complexity(dist: OrdinalDistribution) -> float:
    """Entropy times normalized disequilibrium: zero for both flat and uniform."""
    c = permutation_entropy(dist) * js_divergence_to_uniform(dist) / JS_DIVERGENCE_MAX
    return min(1.0, max(0.0, c))


def ec_point(img: GrayImage | np.ndarray, stride: int = 1) -> ECPoint:
    """Entropy-complexity coordinates of a grayscale image."""
    dist = pattern_distribution(img, stride=stride)
    return ECPoint(h=permutation_entropy(dist), c=statistical_complexity(dist))
