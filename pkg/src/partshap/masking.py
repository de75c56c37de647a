"""Coalition image-set generation by mean-pixel inpainting.

Every excluded part's box is filled with the per-channel mean of the
original image (rounded half-up), so the part's evidence is gone while the
rest of the drawing, including the region outside all boxes, is untouched.
Exclusion wins where boxes overlap: a pixel inside any excluded box is
filled even if an included box also covers it.
"""

from __future__ import annotations

import numpy as np

from .coalitions import Coalition, CoalitionSpace
from .errors import InvalidCoalition
from .image import RasterImage
from .parts import PartSet


def compute_fill_value(image: RasterImage) -> tuple[int, ...]:
    """Per-channel mean over all pixels, rounded half-up to an integer sample.

    Integer arithmetic throughout: round_half_up(s / n) == (2s + n) // (2n).
    """
    arr = image.pixels
    n = arr.shape[0] * arr.shape[1]
    sums = arr.sum(axis=(0, 1), dtype=np.int64)
    return tuple(int((2 * s + n) // (2 * n)) for s in sums)


class CoalitionImageSet:
    """All 2^K masked variants of one image.

    `materialize="eager"` precomputes every variant up front; the default
    renders per coalition request (rendering is pure, so both give identical
    pixels). Instances are safe to share across threads.
    """

    def __init__(
        self,
        base: RasterImage,
        parts: PartSet,
        *,
        materialize: str = "lazy",
    ):
        parts.check_bounds(base)
        self.base = base
        self.part_set = parts
        self.fill_value = compute_fill_value(base)
        self._fill = np.array(self.fill_value, dtype=np.uint8)
        self._cache: dict[int, RasterImage] = {}
        self._space: CoalitionSpace | None = None
        if materialize == "eager":
            for c in self.space.coalitions():
                self._cache[c.bits] = self._render(c)
        elif materialize != "lazy":
            raise ValueError(f"materialize must be 'lazy' or 'eager', not {materialize!r}")

    @property
    def space(self) -> CoalitionSpace:
        # built on demand: enumeration is capped at MAX_EXACT_PARTS parts,
        # while render() itself works for any width (sampling estimator)
        if self._space is None:
            self._space = CoalitionSpace(self.part_set.k)
        return self._space

    @property
    def k(self) -> int:
        return self.part_set.k

    def render(self, coalition: Coalition) -> RasterImage:
        """The base image with every part absent from `coalition` filled in."""
        if coalition.width != self.part_set.k:
            raise InvalidCoalition(
                f"coalition over {coalition.width} parts does not match "
                f"part set of size {self.part_set.k}"
            )
        cached = self._cache.get(coalition.bits)
        if cached is not None:
            return cached
        return self._render(coalition)

    def _render(self, coalition: Coalition) -> RasterImage:
        if coalition.is_full:
            return self.base
        arr = self.base.mutable_copy()
        for k, part in enumerate(self.part_set):
            if coalition.contains(k):
                continue
            x_min, y_min, x_max, y_max = part.box
            arr[y_min:y_max, x_min:x_max, :] = self._fill
        return RasterImage(arr)

    def images(self):
        """All variants in ascending coalition order."""
        for c in self.space.coalitions():
            yield c, self.render(c)


def render_coalition(image_set: CoalitionImageSet, coalition: Coalition) -> RasterImage:
    return image_set.render(coalition)


def generate_set(
    image: RasterImage, parts: PartSet, *, materialize: str = "lazy"
) -> CoalitionImageSet:
    """Build the coalition image set for one sample."""
    return CoalitionImageSet(image, parts, materialize=materialize)
