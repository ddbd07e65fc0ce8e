"""Run configuration: defaults, config-file parsing, and the fingerprint.

The fingerprint is a SHA-256 over the canonical serialization of every
field that can change a cached per-image value. Orchestration knobs
(worker count, binning threshold, genre cutoff, source priority) stay out
of it so tuning them never invalidates a cache.

Config files are plain text, one `key = value` per line, `#` comments and
blank lines ignored. Command-line flags override file values.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

from .corpus import (
    DEFAULT_BIN_THRESHOLD,
    DEFAULT_MIN_GENRE_COUNT,
    DEFAULT_SOURCE_PRIORITY,
    SOURCES,
)
from .detections import DEFAULT_TAU
from .mdl import INPUT_SIZE, K_MAX, PATCH_SIZES, RESTARTS
from .zipc import DEFAULT_LEVEL

_FINGERPRINT_FIELDS = (
    "stride",
    "ec_resize",
    "zipc_resize",
    "mdl_input_size",
    "mdl_patch_sizes",
    "mdl_kmax",
    "mdl_restarts",
    "mdl_color",
    "zip_level",
    "detection_tau",
    "detection_unique_classes",
    "seed",
)


@dataclass(frozen=True)
class RunConfig:
    stride: int = 1
    ec_resize: int = 0  # 0 keeps the original resolution
    zipc_resize: int = 0
    mdl_input_size: int = INPUT_SIZE
    mdl_patch_sizes: tuple[int, ...] = PATCH_SIZES
    mdl_kmax: int = K_MAX
    mdl_restarts: int = RESTARTS
    mdl_color: str = "rgb"
    zip_level: int = DEFAULT_LEVEL
    detection_tau: float = DEFAULT_TAU
    detection_unique_classes: bool = False
    seed: int = 0
    workers: int = 1
    binning_threshold: int = DEFAULT_BIN_THRESHOLD
    min_genre_count: int = DEFAULT_MIN_GENRE_COUNT
    source_priority: tuple[str, ...] = DEFAULT_SOURCE_PRIORITY

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("stride must be at least 1")
        if self.ec_resize < 0 or self.zipc_resize < 0:
            raise ValueError("resize must be 0 (original) or a positive edge length")
        if self.mdl_input_size < 1:
            raise ValueError("mdl_input_size must be positive")
        if not self.mdl_patch_sizes or any(p < 1 for p in self.mdl_patch_sizes):
            raise ValueError("mdl_patch_sizes must be positive")
        if self.mdl_kmax < 1:
            raise ValueError("mdl_kmax must be at least 1")
        if self.mdl_restarts < 1:
            raise ValueError("mdl_restarts must be at least 1")
        if self.mdl_color not in ("rgb", "gray"):
            raise ValueError("mdl_color must be rgb or gray")
        if not 0 <= self.zip_level <= 9:
            raise ValueError("zip_level must be in 0..9")
        if not 0.0 <= self.detection_tau <= 1.0:
            raise ValueError("detection_tau must be in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.binning_threshold < 1:
            raise ValueError("binning_threshold must be at least 1")
        if self.min_genre_count < 0:
            raise ValueError("min_genre_count must be non-negative")
        if sorted(self.source_priority) != sorted(SOURCES):
            raise ValueError(f"source_priority must order exactly {SOURCES}")

    def fingerprint(self) -> str:
        payload = {}
        for name in _FINGERPRINT_FIELDS:
            value = getattr(self, name)
            payload[name] = list(value) if isinstance(value, tuple) else value
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_INT_KEYS = (
    "stride", "ec_resize", "zipc_resize", "mdl_input_size", "mdl_kmax",
    "mdl_restarts", "zip_level", "seed", "workers", "binning_threshold",
    "min_genre_count",
)
_FLOAT_KEYS = ("detection_tau",)
_BOOL_KEYS = ("detection_unique_classes",)
_STR_KEYS = ("mdl_color",)
_TUPLE_INT_KEYS = ("mdl_patch_sizes",)
_TUPLE_STR_KEYS = ("source_priority",)

_ALL_KEYS = _INT_KEYS + _FLOAT_KEYS + _BOOL_KEYS + _STR_KEYS + _TUPLE_INT_KEYS + _TUPLE_STR_KEYS


def _parse_bool(value: str) -> bool:
    low = value.strip().casefold()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def coerce_value(key: str, value: str):
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _BOOL_KEYS:
        return _parse_bool(value)
    if key in _TUPLE_INT_KEYS:
        return tuple(int(v.strip()) for v in value.split(",") if v.strip())
    if key in _TUPLE_STR_KEYS:
        return tuple(v.strip() for v in value.split(",") if v.strip())
    if key in _STR_KEYS:
        return value.strip()
    raise ValueError(f"unknown config key {key!r}")


def parse_config_file(path) -> dict:
    """Read `key = value` lines into typed overrides."""
    overrides = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key = value, got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _ALL_KEYS:
                raise ValueError(f"{path}:{line_no}: unknown config key {key!r}")
            overrides[key] = coerce_value(key, value.strip())
    return overrides


def load_config(path=None, **cli_overrides) -> RunConfig:
    """File values first, then non-None CLI overrides on top."""
    values = parse_config_file(path) if path else {}
    for key, value in cli_overrides.items():
        if value is not None:
            values[key] = value
    return RunConfig(**values)
