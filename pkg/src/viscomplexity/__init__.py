"""Visual complexity metrics and corpus aggregation for album-cover studies.

Per-image metrics: permutation entropy H and statistical complexity C from
2x2 ordinal patterns, a fixed-container DEFLATE compression ratio, and a
clustering description length in bits. Corpus tools ingest album metadata,
standardize genres, bin releases into dynamic periods, and emit plot-ready
CSV summaries through the command-line front-end.
"""

from ._version import __version__
from .cache import CacheStore
from .config import RunConfig, load_config
from .corpus import (
    SUPERGENRES,
    AlbumRecord,
    Period,
    aggregate,
    apply_imputation,
    bin_periods,
    dedupe,
    ingest_metadata,
    load_genre_map,
    map_genres,
    trajectory,
)
from .detections import (
    COCO_CLASSES,
    class_distribution,
    load_detections,
    object_stats,
)
from .errors import VisComplexityError
from .imaging import GrayImage, RGBImage, decode_image, resize, to_grayscale
from .mdl import MDLcScore, mdlc
from .ordinal import (
    PATTERN_COUNT,
    ECPoint,
    ec_point,
    ordinal_pattern,
    pattern_distribution,
    permutation_entropy,
    statistical_complexity,
)
from .pipeline import compute_metrics, ingest_detections, report, scan
from .zipc import ZipcScore, zipc

__all__ = [
    "__version__",
    "CacheStore",
    "RunConfig",
    "load_config",
    "SUPERGENRES",
    "AlbumRecord",
    "Period",
    "aggregate",
    "apply_imputation",
    "bin_periods",
    "dedupe",
    "ingest_metadata",
    "load_genre_map",
    "map_genres",
    "trajectory",
    "COCO_CLASSES",
    "class_distribution",
    "load_detections",
    "object_stats",
    "VisComplexityError",
    "GrayImage",
    "RGBImage",
    "decode_image",
    "resize",
    "to_grayscale",
    "MDLcScore",
    "mdlc",
    "PATTERN_COUNT",
    "ECPoint",
    "ec_point",
    "ordinal_pattern",
    "pattern_distribution",
    "permutation_entropy",
    "statistical_complexity",
    "compute_metrics",
    "ingest_detections",
    "report",
    "scan",
    "ZipcScore",
    "zipc",
]
