"""8-bit raster images and lossless file IO.

Accepted on disk: PNG (8-bit), PGM (P5) and PPM (P6). Lossy formats are
rejected so that masking stays bit-exact end to end. In memory an image is
an immutable (H, W, C) uint8 numpy array with C in {1, 3}.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import EmptyImage, UnsupportedImageFormat

_ACCEPTED_FORMATS = {"PNG", "PPM", "PGM"}
_ACCEPTED_MODES = {"L": 1, "RGB": 3}


@dataclass(frozen=True)
class RasterImage:
    """Immutable 8-bit image, shape (height, width, channels)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise UnsupportedImageFormat(
                f"expected (H, W) or (H, W, 1|3) pixel array, got shape {arr.shape}"
            )
        if arr.dtype != np.uint8:
            raise UnsupportedImageFormat(f"expected uint8 samples, got {arr.dtype}")
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise EmptyImage("image has zero pixels")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self) -> int:
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def mutable_copy(self) -> np.ndarray:
        return self.pixels.copy()


def _from_pil(img: PILImage.Image) -> RasterImage:
    if img.mode not in _ACCEPTED_MODES:
        raise UnsupportedImageFormat(
            f"unsupported pixel mode {img.mode!r}; expected 8-bit grayscale or RGB"
        )
    arr = np.asarray(img, dtype=np.uint8)
    return RasterImage(arr)


def load_image(path: str | Path) -> RasterImage:
    """Decode a PNG/PGM/PPM file; reject anything lossy or exotic."""
    with PILImage.open(path) as img:
        if img.format not in _ACCEPTED_FORMATS:
            raise UnsupportedImageFormat(
                f"{path}: format {img.format!r} not accepted (PNG, PGM, PPM only)"
            )
        return _from_pil(img)


def decode_image(data: bytes) -> RasterImage:
    """Decode in-memory image bytes (same format rules as load_image)."""
    with PILImage.open(io.BytesIO(data)) as img:
        if img.format not in _ACCEPTED_FORMATS:
            raise UnsupportedImageFormat(
                f"format {img.format!r} not accepted (PNG, PGM, PPM only)"
            )
        return _from_pil(img)


def _to_pil(image: RasterImage) -> PILImage.Image:
    arr = image.pixels
    if image.channels == 1:
        return PILImage.fromarray(arr[:, :, 0], mode="L")
    return PILImage.fromarray(arr, mode="RGB")


def save_png(image: RasterImage, path: str | Path) -> None:
    _to_pil(image).save(path, format="PNG")


def encode_png(image: RasterImage) -> bytes:
    """Lossless PNG bytes, used by the wire protocol client."""
    buf = io.BytesIO()
    _to_pil(image).save(buf, format="PNG")
    return buf.getvalue()
