"""Ordinal pattern indexing, entropy, and statistical complexity."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from viscomplexity.errors import ImageTooSmall
from viscomplexity.imaging import GrayImage
from viscomplexity.ordinal import (
    JS_DIVERGENCE_MAX,
    PATTERN_COUNT,
    OrdinalDistribution,
    ec_point,
    js_divergence_to_uniform,
    ordinal_pattern,
    pattern_distribution,
    permutation_entropy,
    statistical_complexity,
)

from . import oracles


def _dist(counts) -> OrdinalDistribution:
    counts = np.asarray(counts, dtype=np.int64)
    return OrdinalDistribution(counts=counts, total=int(counts.sum()))


def test_pattern_anchor_windows():
    assert ordinal_pattern((1, 2, 3, 4)) == 0
    assert ordinal_pattern((5, 5, 5, 5)) == 0
    assert ordinal_pattern((4, 3, 2, 1)) == 23


def test_all_permutations_hit_distinct_indices():
    from itertools import permutations

    indices = {ordinal_pattern(p) for p in permutations((10, 20, 30, 40))}
    assert indices == set(range(PATTERN_COUNT))


@settings(max_examples=300, deadline=None)
@given(window=st.tuples(*[st.integers(0, 5)] * 4))
def test_pattern_matches_bruteforce_oracle(window):
    assert ordinal_pattern(window) == oracles.pattern_index(window)


def test_distribution_of_sorted_grid():
    grid = np.arange(1, 10).reshape(3, 3)
    dist = pattern_distribution(grid)
    assert dist.counts[0] == 4 and dist.total == 4


def test_distribution_of_constant_image():
    dist = pattern_distribution(np.full((8, 8), 7))
    assert dist.counts[0] == 49
    assert dist.counts[1:].sum() == 0


def test_two_by_two_has_single_window():
    assert pattern_distribution(np.array([[1, 2], [3, 4]])).total == 1


def test_too_small_image_raises():
    with pytest.raises(ImageTooSmall):
        pattern_distribution(np.array([[1, 2, 3]]))


def test_accepts_gray_image_wrapper():
    img = GrayImage(np.arange(16, dtype=np.uint8).reshape(4, 4))
    assert pattern_distribution(img).total == 9


def test_stride_skips_windows():
    g = np.arange(25).reshape(5, 5)
    dist = pattern_distribution(g, stride=2)
    # Windows anchored at rows/cols {0, 2}: four windows, all ascending.
    assert dist.total == 4
    assert dist.counts[0] == 4


@settings(max_examples=50, deadline=None)
@given(
    arr=hnp.arrays(np.int64, hnp.array_shapes(min_dims=2, max_dims=2, min_side=2, max_side=7),
                   elements=st.integers(0, 3)),
    stride=st.integers(1, 3),
)
def test_stride_distribution_matches_direct_enumeration(arr, stride):
    dist = pattern_distribution(arr, stride=stride)
    counts = [0] * PATTERN_COUNT
    for y in range(0, arr.shape[0] - 1, stride):
        for x in range(0, arr.shape[1] - 1, stride):
            window = (arr[y, x], arr[y, x + 1], arr[y + 1, x], arr[y + 1, x + 1])
            counts[oracles.pattern_index(window)] += 1
    assert dist.counts.tolist() == counts


def test_entropy_anchors():
    single = [0] * PATTERN_COUNT
    single[5] = 10
    assert permutation_entropy(_dist(single)) == 0.0
    assert permutation_entropy(_dist([3] * PATTERN_COUNT)) == 1.0
    two = [0] * PATTERN_COUNT
    two[0] = two[7] = 6
    expected = math.log(2) / math.log(24)
    assert permutation_entropy(_dist(two)) == pytest.approx(expected, abs=1e-15)


def test_divergence_normalizer_matches_oracle():
    assert JS_DIVERGENCE_MAX == pytest.approx(oracles.js_max_24(), abs=1e-12)
    delta = [0] * PATTERN_COUNT
    delta[0] = 9
    assert js_divergence_to_uniform(_dist(delta)) == pytest.approx(
        JS_DIVERGENCE_MAX, abs=1e-12
    )


def test_complexity_zero_for_uniform_and_degenerate():
    assert statistical_complexity(_dist([2] * PATTERN_COUNT)) == 0.0
    single = [0] * PATTERN_COUNT
    single[3] = 4
    assert statistical_complexity(_dist(single)) == 0.0


def test_complexity_two_pattern_matches_oracle():
    two = [0] * PATTERN_COUNT
    two[0] = two[23] = 8
    assert statistical_complexity(_dist(two)) == pytest.approx(
        oracles.complexity(two), abs=1e-14
    )


@settings(max_examples=100, deadline=None)
@given(counts=st.lists(st.integers(0, 20), min_size=24, max_size=24).filter(lambda c: sum(c) > 0))
def test_h_and_c_match_oracle_on_random_distributions(counts):
    dist = _dist(counts)
    assert permutation_entropy(dist) == pytest.approx(oracles.entropy_norm(counts), abs=1e-12)
    assert statistical_complexity(dist) == pytest.approx(oracles.complexity(counts), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    arr=hnp.arrays(np.uint8, hnp.array_shapes(min_dims=2, max_dims=2, min_side=2, max_side=10),
                   elements=st.integers(0, 40)),
    scale=st.integers(1, 5),
    shift=st.integers(0, 500),
)
def test_monotone_map_leaves_distribution_identical(arr, scale, shift):
    mapped = arr.astype(np.int64) ** 2 * scale + arr + shift
    base = pattern_distribution(arr)
    assert (pattern_distribution(mapped).counts == base.counts).all()


def test_nonuniform_nondegenerate_distribution_has_positive_c():
    counts = [0] * PATTERN_COUNT
    counts[0], counts[1], counts[2] = 10, 5, 1
    assert statistical_complexity(_dist(counts)) > 0.0


def test_ec_point_constant_and_structured():
    flat = ec_point(np.full((16, 16), 9))
    assert flat.h == 0.0 and flat.c == 0.0
    ramp = np.tile(np.arange(32), (32, 1)) + np.arange(32)[:, None] * 2
    pt = ec_point(ramp)
    assert 0.0 <= pt.h <= 1.0 and 0.0 <= pt.c <= 1.0


def test_distribution_validates_shape_and_total():
    with pytest.raises(ValueError):
        OrdinalDistribution(counts=np.zeros(23, dtype=np.int64), total=0)
    with pytest.raises(ValueError):
        OrdinalDistribution(counts=np.zeros(24, dtype=np.int64), total=0)
    with pytest.raises(ValueError):
        OrdinalDistribution(counts=np.ones(24, dtype=np.int64), total=5)
