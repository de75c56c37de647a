"""Input coercion helpers so the public surfaces accept plain arrays and
(name, box) pairs, sklearn-style."""

from __future__ import annotations

import numpy as np

from .image import RasterImage
from .parts import PartSet, part_set


def as_raster_image(obj) -> RasterImage:
    """Accept a RasterImage or any uint8 (H, W) / (H, W, C) array."""
    if isinstance(obj, RasterImage):
        return obj
    return RasterImage(np.asarray(obj))


def as_part_set(obj) -> PartSet:
    """Accept a PartSet or an iterable of (name, box) pairs."""
    return part_set(obj)


def check_sample(image, parts) -> tuple[RasterImage, PartSet]:
    img = as_raster_image(image)
    ps = as_part_set(parts)
    ps.check_bounds(img)
    return img, ps
