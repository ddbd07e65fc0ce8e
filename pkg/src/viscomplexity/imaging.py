"""Decoding and raster conversions shared by every metric.

All functions are pure: they take immutable rasters and return new ones, so
they can run in any number of worker processes without coordination.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import CorruptImage, InvalidDimensions

# ITU-R BT.601 luminance weights.
_LUMA_R = 0.299
_LUMA_G = 0.587
_LUMA_B = 0.114


@dataclass(frozen=True, eq=False)
class RGBImage:
    """8-bit RGB raster stored as an immutable (height, width, 3) array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must have at least one pixel")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit luminance raster stored as an immutable (height, width) array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2:
            raise ValueError(f"expected (h, w) array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must have at least one pixel")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def decode_image(data: bytes) -> RGBImage:
    """Decode JPEG or PNG bytes into an RGB raster.

    Transparent sources are composited over white; palette and grayscale
    sources are expanded to RGB. Raises CorruptImage on undecodable input.
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            has_alpha = im.mode in ("RGBA", "LA", "PA") or (
                im.mode == "P" and "transparency" in im.info
            )
            if has_alpha:
                rgba = im.convert("RGBA")
                base = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
                base.alpha_composite(rgba)
                im = base.convert("RGB")
            elif im.mode != "RGB":
                im = im.convert("RGB")
            return RGBImage(np.asarray(im, dtype=np.uint8))
    except (OSError, SyntaxError, ValueError, Image.DecompressionBombError) as exc:
        # Decoder messages can embed object reprs with memory addresses;
        # keep the stored message stable across runs.
        raise CorruptImage(f"undecodable image ({type(exc).__name__})") from exc


def encode_png(img: RGBImage) -> bytes:
    """Lossless PNG encoding, mainly for fixtures and debug dumps."""
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def to_grayscale(img: RGBImage) -> GrayImage:
    """BT.601 luminance, rounded half-up and clamped to [0, 255]."""
    rgb = img.pixels.astype(np.float64)
    y = rgb[..., 0] * _LUMA_R + rgb[..., 1] * _LUMA_G + rgb[..., 2] * _LUMA_B
    y = np.clip(np.floor(y + 0.5), 0.0, 255.0)
    return GrayImage(y.astype(np.uint8))


def _axis_samples(dst: int, src: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Half-pixel-center mapping with edge-clamped neighbours.
    pos = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    lo = np.floor(pos).astype(np.int64)
    frac = pos - lo
    return np.clip(lo, 0, src - 1), np.clip(lo + 1, 0, src - 1), frac


def resize(img: RGBImage, width: int, height: int) -> RGBImage:
    """Bilinear resize with edge-clamped sampling.

    Resizing to the source dimensions returns the input unchanged, so the
    identity case is bit-exact by construction.
    """
    if width < 1 or height < 1:
        raise InvalidDimensions(f"target {width}x{height} is not positive")
    if width == img.width and height == img.height:
        return img

    src = img.pixels.astype(np.float64)
    x0, x1, tx = _axis_samples(width, img.width)
    y0, y1, ty = _axis_samples(height, img.height)
    tx = tx[None, :, None]
    ty = ty[:, None, None]

    rows0 = src[y0]
    rows1 = src[y1]
    top = rows0[:, x0] * (1.0 - tx) + rows0[:, x1] * tx
    bottom = rows1[:, x0] * (1.0 - tx) + rows1[:, x1] * tx
    out = top * (1.0 - ty) + bottom * ty
    return RGBImage(np.clip(np.floor(out + 0.5), 0.0, 255.0).astype(np.uint8))


def to_raw_bitmap(img: RGBImage) -> bytes:
    """Header-less row-major RGB24 byte stream, 3 * width * height bytes."""
    return img.pixels.tobytes()


def gray_to_rgb(img: GrayImage) -> RGBImage:
    """Replicate luminance into three channels."""
    return RGBImage(np.repeat(img.pixels[:, :, None], 3, axis=2))
