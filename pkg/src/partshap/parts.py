"""Named parts with axis-aligned boxes; the ordered part set defines bit indices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BoxOutOfBounds, DataError, PartIndexOutOfRange
from .image import RasterImage

Box = tuple[int, int, int, int]  # x_min, y_min, x_max, y_max; inclusive-exclusive


@dataclass(frozen=True)
class PartAnnotation:
    name: str
    box: Box

    def __post_init__(self) -> None:
        if not self.name:
            raise DataError("part name must be non-empty")
        x_min, y_min, x_max, y_max = self.box
        if x_min < 0 or y_min < 0 or x_min >= x_max or y_min >= y_max:
            raise DataError(
                f"part {self.name!r}: degenerate box {self.box} "
                "(need 0 <= min < max on both axes)"
            )
        object.__setattr__(self, "box", (int(x_min), int(y_min), int(x_max), int(y_max)))


@dataclass(frozen=True)
class PartSet:
    """Ordered list of annotated parts; position in the list is the bit index."""

    parts: tuple[PartAnnotation, ...]

    def __post_init__(self) -> None:
        parts = tuple(self.parts)
        if not parts:
            raise DataError("a part set needs at least one part")
        names = [p.name for p in parts]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate part names: {dupes}")
        object.__setattr__(self, "parts", parts)

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __getitem__(self, index: int) -> PartAnnotation:
        if not 0 <= index < len(self.parts):
            raise PartIndexOutOfRange(f"part index {index} out of range")
        return self.parts[index]

    def index(self, name: str) -> int:
        for i, p in enumerate(self.parts):
            if p.name == name:
                return i
        raise KeyError(name)

    def check_bounds(self, image: RasterImage) -> None:
        """Raise BoxOutOfBounds naming the first part whose box leaves the image."""
        for p in self.parts:
            x_min, y_min, x_max, y_max = p.box
            if x_max > image.width or y_max > image.height:
                raise BoxOutOfBounds(
                    f"part {p.name!r}: box {p.box} exceeds "
                    f"{image.width}x{image.height} image"
                )


def part_set(parts: Iterable[tuple[str, Sequence[int]]] | PartSet) -> PartSet:
    """Build a PartSet from (name, box) pairs; pass through an existing one."""
    if isinstance(parts, PartSet):
        return parts
    return PartSet(tuple(PartAnnotation(name, tuple(box)) for name, box in parts))
