"""Rendered images and their PPM / PNG encodings."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Image:
    """An ``H x W x C`` image with values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3 or min(pixels.shape) < 1:
            raise ValueError(f"image must be H x W x C, got shape {pixels.shape}")
        if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0 + 1e-12):
            raise ValueError("image values must lie in [0, 1]")
        object.__setattr__(self, "pixels", np.clip(pixels, 0.0, 1.0))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def to_rgb8(self) -> np.ndarray:
        """8-bit RGB; one channel is replicated to gray, missing channels are zero."""
        quantized = np.rint(self.pixels * 255.0).astype(np.uint8)
        if self.channels == 1:
            return np.repeat(quantized, 3, axis=2)
        if self.channels < 3:
            pad = np.zeros((self.height, self.width, 3 - self.channels), dtype=np.uint8)
            return np.concatenate([quantized, pad], axis=2)
        return np.ascontiguousarray(quantized[:, :, :3])


def write_ppm(image: Image, path: str | Path) -> Path:
    """Write a binary P6 portable pixmap."""
    path = Path(path)
    PILImage.fromarray(image.to_rgb8()).save(path, format="PPM")
    return path


def write_png(image: Image, path: str | Path) -> Path:
    """Write a lossless 8-bit RGB PNG."""
    path = Path(path)
    PILImage.fromarray(image.to_rgb8()).save(path, format="PNG")
    return path


def write_image(image: Image, path: str | Path) -> Path:
    """Write ``.png`` via PNG and anything else as P6."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        write_png(image, path)
    else:
        write_ppm(image, path)
    logger.info("Wrote image %s (%dx%d)", path, image.width, image.height)
    return path


def read_rgb8(path: str | Path) -> np.ndarray:
    """Read a PPM or PNG file back as ``H x W x 3`` uint8."""
    with PILImage.open(path) as img:
        return np.asarray(img.convert("RGB"))


@dataclass(frozen=True)
class ImageDelta:
    """Per-channel absolute differences between two images."""

    max_abs: float
    mean_abs: float

    def to_dict(self) -> dict[str, float]:
        return {"max_abs": self.max_abs, "mean_abs": self.mean_abs}


def compare_images(a: Image, b: Image) -> ImageDelta:
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}")
    diff = np.abs(a.pixels - b.pixels)
    return ImageDelta(float(diff.max()), float(diff.mean()))
