"""Meaningful complexity as the description length of patch clusterings.

The image is resized to a fixed working resolution and cut into non-overlapping
square patches at several scales. Each patch becomes a feature row (per-channel
mean and standard deviation, standardized per column within the scale). For
every candidate cluster count K a seeded K-means model is fit and scored with a
two-part code:

    model bits       parameters of the K Gaussians plus mixture weights,
                     each costed at half a log of the sample count
    assignment bits  -log2 of each point's cluster frequency
    residual bits    per-coordinate Gaussian code length of the residuals at
                     quantization step 1/256, floored at zero bits

The best K per scale wins and the per-scale totals sum into the score. Flat
images cost almost nothing, images with a few coherent regions pay mostly for
assignments, and finely textured images pay heavily for residuals.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPatchSize
from .imaging import RGBImage, resize, to_grayscale

INPUT_SIZE = 224
PATCH_SIZES = (4, 8, 16)
K_MAX = 5
RESTARTS = 5
SIGMA_MIN = 1e-3
QUANT_STEP = 1.0 / 256.0

_MAX_ITER = 100
_LOG2E = math.log2(math.e)
_HALF_LOG2_2PI = 0.5 * math.log2(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class PatchFeatures:
    """Standardized per-patch features for one scale: (N, d) float64."""

    level: int
    features: np.ndarray


@dataclass(frozen=True)
class MDLcScore:
    """Total description length in bits plus the winning K per scale."""

    bits: float
    per_level: dict[int, tuple[int, float]]


def patch_features(img: RGBImage, patch: int, color: str = "rgb") -> PatchFeatures:
    """Mean/std features of non-overlapping patch x patch tiles, standardized.

    The patch size must divide both image dimensions. Columns that are
    constant across patches standardize to all zeros.
    """
    if patch < 1 or img.width % patch or img.height % patch:
        raise InvalidPatchSize(f"patch {patch} does not divide {img.width}x{img.height}")
    if color == "rgb":
        arr = img.pixels.astype(np.float64)
    elif color == "gray":
        arr = to_grayscale(img).pixels.astype(np.float64)[:, :, None]
    else:
        raise ValueError(f"unknown color mode {color!r}")

    h, w, ch = arr.shape
    tiles = (
        arr.reshape(h // patch, patch, w // patch, patch, ch)
        .transpose(0, 2, 1, 3, 4)
        .reshape(-1, patch * patch, ch)
    )
    feats = np.concatenate([tiles.mean(axis=1), tiles.std(axis=1)], axis=1)

    col_min = feats.min(axis=0)
    col_max = feats.max(axis=0)
    constant = col_max == col_min
    sd = feats.std(axis=0)
    sd[constant] = 1.0  # avoid 0/0; constant columns are zeroed below
    feats = (feats - feats.mean(axis=0)) / sd
    feats[:, constant] = 0.0
    return PatchFeatures(level=patch, features=feats)


def _derive_seed(*parts) -> int:
    digest = hashlib.sha256("/".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _kmeans_once(x: np.ndarray, k: int, rng: np.random.Generator):
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[int(rng.integers(n))]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=d2 / total))
        centers[j] = x[pick]
        d2 = np.minimum(d2, ((x - centers[j]) ** 2).sum(axis=1))

    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(_MAX_ITER):
        dists = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        counts = np.bincount(new_labels, minlength=centers.shape[0])
        if (counts == 0).any():
            # Unused components carry no code; drop them and relabel.
            keep = counts > 0
            centers = centers[keep]
            remap = np.cumsum(keep) - 1
            new_labels = remap[new_labels]
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(centers.shape[0]):
            centers[j] = x[labels == j].mean(axis=0)

    inertia = float(((x - centers[labels]) ** 2).sum())
    return labels, centers, inertia


def _fit_clusters(x: np.ndarray, k: int, seed: int, restarts: int):
    """Best-of-n-restarts K-means with k-means++ seeding; fully seeded."""
    if k == 1:
        center = x.mean(axis=0, keepdims=True)
        return np.zeros(x.shape[0], dtype=np.int64), center
    best = None
    for restart in range(restarts):
        rng = np.random.default_rng(_derive_seed(seed, k, restart))
        labels, centers, inertia = _kmeans_once(x, k, rng)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia)
    return best[0], best[1]


def _two_part_cost(x: np.ndarray, labels: np.ndarray, centers: np.ndarray):
    n, d = x.shape
    k = centers.shape[0]
    counts = np.bincount(labels, minlength=k).astype(np.float64)

    model_bits = (k * d + k - 1) / 2.0 * math.log2(n)
    assignment_bits = float(-(counts * np.log2(counts / n)).sum()) if k > 1 else 0.0

    resid = x - centers[labels]
    sq_by_cluster = np.bincount(labels, weights=(resid**2).sum(axis=1), minlength=k)
    sigma = np.sqrt(sq_by_cluster / (counts * d))
    sigma = np.maximum(sigma, SIGMA_MIN)

    s = sigma[labels][:, None]
    coord_bits = (
        np.log2(s)
        + _HALF_LOG2_2PI
        + (resid**2) / (2.0 * s**2) * _LOG2E
        - math.log2(QUANT_STEP)
    )
    residual_bits = float(np.maximum(coord_bits, 0.0).sum())
    return model_bits + assignment_bits + residual_bits


def description_length(f: PatchFeatures, k: int, seed: int = 0, restarts: int = RESTARTS) -> float:
    """Two-part code length in bits of the K-cluster model of the features.

    When K exceeds the number of distinct feature rows the clustering is
    degenerate and the cost of K = distinct-row-count is returned instead.
    """
    if k < 1 or k > f.features.shape[0]:
        raise ValueError(f"k must be in [1, {f.features.shape[0]}], got {k}")
    bits, _ = _clustered_cost(f, k, seed, restarts)
    return bits


def _distinct_rows(x: np.ndarray) -> int:
    return np.unique(x, axis=0).shape[0]


def _clustered_cost(f: PatchFeatures, k: int, seed: int, restarts: int):
    x = f.features
    k_eff = min(k, _distinct_rows(x))
    labels, centers = _fit_clusters(x, k_eff, _derive_seed(seed, f.level), restarts)
    # Empty-cluster drops inside the fit can shrink the model further.
    k_eff = centers.shape[0]
    return _two_part_cost(x, labels, centers), k_eff


def select_clusters(
    f: PatchFeatures, k_max: int = K_MAX, seed: int = 0, restarts: int = RESTARTS
) -> tuple[int, float]:
    """Winning (K, bits) over K = 1..k_max, ties resolved toward smaller K."""
    best_k, best_bits = 1, None
    for k in range(1, min(k_max, f.features.shape[0]) + 1):
        bits, k_eff = _clustered_cost(f, k, seed, restarts)
        if best_bits is None or bits < best_bits:
            best_k, best_bits = k_eff, bits
    return best_k, best_bits


def mdlc(
    img: RGBImage,
    input_size: int = INPUT_SIZE,
    patch_sizes: tuple[int, ...] = PATCH_SIZES,
    k_max: int = K_MAX,
    seed: int = 0,
    restarts: int = RESTARTS,
    color: str = "rgb",
) -> MDLcScore:
    """Total meaningful-complexity bits of an image across all scales."""
    working = resize(img, input_size, input_size)
    per_level: dict[int, tuple[int, float]] = {}
    total = 0.0
    for patch in patch_sizes:
        feats = patch_features(working, patch, color=color)
        chosen_k, bits = select_clusters(feats, k_max=k_max, seed=seed, restarts=restarts)
        per_level[patch] = (chosen_k, bits)
        total += bits
    return MDLcScore(bits=total, per_level=per_level)
