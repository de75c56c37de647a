"""Coalitions over K parts: bit-set subsets, power-set enumeration and the
factorial Shapley weights.

A coalition is an integer bit-set of width K, bit k set meaning part k is
present. Enumeration is ascending by bit pattern, so index 0 is the empty
coalition and index 2^K - 1 the full one. Exact enumeration is capped at
K = 24 parts; beyond that the permutation-sampling estimator in `engine`
is the supported route.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator

from .errors import (
    InvalidCoalition,
    PartCountOutOfRange,
    PartIndexOutOfRange,
    SizeOutOfRange,
)

MAX_EXACT_PARTS = 24


@dataclass(frozen=True)
class Coalition:
    """A subset of K parts encoded as a bit-set.

    Any width is representable; the MAX_EXACT_PARTS cap applies only to
    exhaustive enumeration (CoalitionSpace), not to individual coalitions,
    so the sampling estimator can address games beyond the cap.
    """

    bits: int
    width: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise PartCountOutOfRange(
                f"coalition width must be at least 1, got {self.width}"
            )
        if self.bits < 0 or self.bits >> self.width:
            raise InvalidCoalition(
                f"bit pattern {self.bits:#x} does not fit in {self.width} parts"
            )

    @property
    def size(self) -> int:
        """Number of parts in the coalition (population count)."""
        return self.bits.bit_count()

    def contains(self, part: int) -> bool:
        self._check_part(part)
        return bool(self.bits >> part & 1)

    def with_part(self, part: int) -> "Coalition":
        self._check_part(part)
        return Coalition(self.bits | 1 << part, self.width)

    def without_part(self, part: int) -> "Coalition":
        self._check_part(part)
        return Coalition(self.bits & ~(1 << part), self.width)

    def members(self) -> tuple[int, ...]:
        """Part indices present, ascending."""
        return tuple(k for k in range(self.width) if self.bits >> k & 1)

    def bitstring(self) -> str:
        """Standard binary rendering, leftmost char = part K-1."""
        return format(self.bits, f"0{self.width}b")

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    @property
    def is_full(self) -> bool:
        return self.bits == (1 << self.width) - 1

    def _check_part(self, part: int) -> None:
        if not 0 <= part < self.width:
            raise PartIndexOutOfRange(
                f"part index {part} out of range for {self.width} parts"
            )


class CoalitionSpace:
    """Power set of K parts plus the precomputed Shapley weight table.

    weight[s] = s! (K-s-1)! / K! for s = 0..K-1, computed as an exact
    rational and reduced to a double only at the end. For every fixed part
    the weights over all subsets of the remaining parts sum to 1.
    """

    def __init__(self, k: int):
        if not 1 <= k <= MAX_EXACT_PARTS:
            raise PartCountOutOfRange(
                f"part count must be in [1, {MAX_EXACT_PARTS}], got {k}"
            )
        self.k = k
        kf = factorial(k)
        self.weights = tuple(
            float(Fraction(factorial(s) * factorial(k - s - 1), kf))
            for s in range(k)
        )

    def __repr__(self) -> str:
        return f"CoalitionSpace(k={self.k})"

    @property
    def num_coalitions(self) -> int:
        return 1 << self.k

    @property
    def empty(self) -> Coalition:
        return Coalition(0, self.k)

    @property
    def full(self) -> Coalition:
        return Coalition((1 << self.k) - 1, self.k)

    def weight(self, size: int) -> float:
        """Shapley weight of a coalition of `size` parts excluding the player."""
        if not 0 <= size < self.k:
            raise SizeOutOfRange(
                f"coalition size {size} out of range for k={self.k} "
                f"(valid sizes: 0..{self.k - 1})"
            )
        return self.weights[size]

    def coalitions(self) -> Iterator[Coalition]:
        """All 2^K coalitions, ascending bit pattern (empty first, full last)."""
        for bits in range(1 << self.k):
            yield Coalition(bits, self.k)

    def coalition(self, bits: int) -> Coalition:
        return Coalition(bits, self.k)

    def marginal_pairs(self, part: int) -> Iterator[tuple[Coalition, Coalition]]:
        """All 2^(K-1) pairs (S, S ∪ {part}) with S not containing `part`.

        Pairs are emitted in ascending bit pattern of S; the two elements of
        a pair differ only at bit `part`.
        """
        if not 0 <= part < self.k:
            raise PartIndexOutOfRange(
                f"part index {part} out of range for {self.k} parts"
            )
        bit = 1 << part
        for bits in range(1 << self.k):
            if bits & bit:
                continue
            yield Coalition(bits, self.k), Coalition(bits | bit, self.k)


def enumerate_coalitions(k: int) -> list[Coalition]:
    """All 2^k coalitions over k parts in ascending bit-pattern order."""
    return list(CoalitionSpace(k).coalitions())


def shapley_weight(space: CoalitionSpace, size: int) -> float:
    return space.weight(size)


def marginal_pairs(space: CoalitionSpace, part: int) -> list[tuple[Coalition, Coalition]]:
    return list(space.marginal_pairs(part))
