"""Shared fixtures: deterministic synthetic images and corpus files."""

from __future__ import annotations

import numpy as np
import pytest

from viscomplexity.imaging import RGBImage, encode_png


def rgb_noise(seed: int, width: int = 64, height: int = 64) -> RGBImage:
    rng = np.random.default_rng(seed)
    return RGBImage(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def rgb_constant(value=(128, 128, 128), width: int = 64, height: int = 64) -> RGBImage:
    arr = np.empty((height, width, 3), dtype=np.uint8)
    arr[:] = value
    return RGBImage(arr)


def rgb_gradient(width: int = 64, height: int = 64) -> RGBImage:
    ramp = np.linspace(0, 255, width).astype(np.uint8)
    return RGBImage(np.repeat(np.tile(ramp, (height, 1))[:, :, None], 3, axis=2))


@pytest.fixture
def noise_img() -> RGBImage:
    return rgb_noise(0)


@pytest.fixture
def flat_img() -> RGBImage:
    return rgb_constant()


@pytest.fixture
def image_dir(tmp_path):
    """Ten decodable PNGs plus one file of junk bytes."""
    d = tmp_path / "imgs"
    d.mkdir()
    for i in range(10):
        (d / f"img{i:02d}.png").write_bytes(encode_png(rgb_noise(i, 24, 24)))
    (d / "broken.png").write_bytes(b"this is not an image")
    return d


def write_metadata(path, rows):
    header = "album_id,artist,title,year,raw_genres,image_ref,source"
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")


def write_genre_map(path, entries):
    lines = ["raw_label,supergenres"] + [f"{raw},{targets}" for raw, targets in entries]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
