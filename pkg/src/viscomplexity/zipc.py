"""Compression-ratio complexity: DEFLATE incompressibility of the raw bitmap."""

from __future__ import annotations

import io
import zipfile
from dataclasses import dataclass

from .imaging import RGBImage, to_raw_bitmap

# Every byte of container metadata is pinned so identical pixels always
# produce identical archives; timestamps default to the current time otherwise.
_ENTRY_NAME = "raster"
_ENTRY_DATE = (1980, 1, 1, 0, 0, 0)
DEFAULT_LEVEL = 9


@dataclass(frozen=True)
class ZipcScore:
    """Compressed-size to raw-size ratio; may exceed 1 on tiny images."""

    ratio: float
    compressed_bytes: int
    raw_bytes: int


def zip_container(raw: bytes, level: int = DEFAULT_LEVEL) -> bytes:
    """Wrap bytes in a single-entry ZIP archive with fixed metadata."""
    info = zipfile.ZipInfo(_ENTRY_NAME, date_time=_ENTRY_DATE)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.create_system = 3
    info.external_attr = 0o644 << 16
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as archive:
        archive.writestr(info, raw, compress_type=zipfile.ZIP_DEFLATED, compresslevel=level)
    return buf.getvalue()


def zipc(img: RGBImage, level: int = DEFAULT_LEVEL) -> ZipcScore:
    """Ratio of the zipped raw-RGB bitmap size to its uncompressed size."""
    raw = to_raw_bitmap(img)
    packed = zip_container(raw, level=level)
    return ZipcScore(
        ratio=len(packed) / len(raw),
        compressed_bytes=len(packed),
        raw_bytes=len(raw),
    )
