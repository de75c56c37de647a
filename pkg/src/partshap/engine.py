"""Exact per-part contribution of one sample, and its derived histogram.

The engine evaluates each of the 2^K coalition images exactly once, caches
the logit vectors by coalition, and then folds the weighted marginal
differences per part over the cache. Accumulation is float64 with pairwise
summation over the coalition axis, in a fixed ascending-coalition order, so
results do not depend on evaluation scheduling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np

from .coalitions import Coalition, CoalitionSpace
from .image import RasterImage
from .masking import generate_set
from .models import ValueFunction
from .parts import PartSet

_EVAL_CHUNK = 1024


def _popcounts(k: int) -> np.ndarray:
    """Population count of every bit pattern in [0, 2^k)."""
    n = np.arange(1 << k, dtype=np.uint32)
    counts = np.zeros(1 << k, dtype=np.int64)
    while n.any():
        counts += n & 1
        n >>= 1
    return counts


@dataclass
class PartShapleyMatrix:
    """K x C matrix of per-part, per-class contribution values.

    Also carries the per-coalition logit cache so downstream consumers
    (target selection, persistence, the sanity harness) never re-evaluate.
    """

    values: np.ndarray
    part_names: tuple[str, ...]
    class_names: tuple[str, ...]
    coalition_logits: dict[int, np.ndarray]

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def num_classes(self) -> int:
        return self.values.shape[1]

    def full_logits(self) -> np.ndarray:
        return self.coalition_logits[(1 << self.k) - 1]

    def empty_logits(self) -> np.ndarray:
        return self.coalition_logits[0]

    def predicted_class(self) -> int:
        return int(np.argmax(self.full_logits()))

    def efficiency_residual(self) -> np.ndarray:
        """Per class: |sum_k values[k][c] - (f(full)[c] - f(empty)[c])|."""
        gap = self.full_logits() - self.empty_logits()
        return np.abs(self.values.sum(axis=0) - gap)


@dataclass
class SampleContribution:
    """Per-part histogram for one target class, plus its normalization."""

    histogram: np.ndarray
    target_class: int
    target_mode: str  # "predicted" or "given"
    normalized: np.ndarray
    argmax_part: int
    degenerate_normalization: bool  # max(histogram) <= 0: normalized is raw


def explain_sample(
    vf: ValueFunction, image: RasterImage, parts: PartSet
) -> PartShapleyMatrix:
    """Exact contribution of every part to every class logit.

    Issues exactly 2^K model evaluations (one per coalition image); the K
    per-part sums reuse the shared logit cache.
    """
    space = CoalitionSpace(parts.k)
    image_set = generate_set(image, parts)
    k = parts.k
    n = 1 << k

    logits = np.empty((n, vf.num_classes), dtype=np.float64)
    for start in range(0, n, _EVAL_CHUNK):
        chunk = range(start, min(start + _EVAL_CHUNK, n))
        imgs = [image_set.render(Coalition(bits, k)) for bits in chunk]
        logits[start : start + len(imgs)] = vf.evaluate_batch(imgs)

    popcounts = _popcounts(k)
    all_bits = np.arange(n, dtype=np.int64)
    values = np.empty((k, vf.num_classes), dtype=np.float64)
    for part in range(k):
        bit = 1 << part
        without = all_bits[(all_bits & bit) == 0]
        diffs = logits[without | bit] - logits[without]
        w = np.array([space.weights[s] for s in popcounts[without]])
        values[part] = np.sum(w[:, np.newaxis] * diffs, axis=0)

    return PartShapleyMatrix(
        values=values,
        part_names=parts.names,
        class_names=vf.class_names,
        coalition_logits={int(b): logits[b] for b in all_bits},
    )


def select_target(
    matrix: PartShapleyMatrix, mode: int | str = "predicted"
) -> SampleContribution:
    """Pick the class column, normalize by the sample max, find the top part.

    `mode` is either "predicted" (argmax of the unmasked image's logits) or
    an explicit class index. Ties in the argmax go to the smallest part
    index. When the column max is not positive, the normalized histogram is
    the raw one and the degenerate flag is set instead of dividing.
    """
    if mode == "predicted":
        target = matrix.predicted_class()
        target_mode = "predicted"
    else:
        target = int(mode)
        if not 0 <= target < matrix.num_classes:
            raise IndexError(
                f"class index {target} out of range for {matrix.num_classes} classes"
            )
        target_mode = "given"

    histogram = matrix.values[:, target].copy()
    top = float(histogram.max())
    degenerate = not top > 0.0
    normalized = histogram.copy() if degenerate else histogram / top
    return SampleContribution(
        histogram=histogram,
        target_class=target,
        target_mode=target_mode,
        normalized=normalized,
        argmax_part=int(np.argmax(histogram)),
        degenerate_normalization=degenerate,
    )


def estimate_shapley_mc(
    vf: ValueFunction,
    image: RasterImage,
    parts: PartSet,
    num_permutations: int,
    seed: int,
) -> PartShapleyMatrix:
    """Permutation-sampling estimate of the contribution matrix.

    Unbiased for any num_permutations >= 1; when num_permutations >= K!
    every ordering is enumerated exactly once, which reproduces the exact
    values. Coalition evaluations are cached, so the model is called at
    most min(needed prefixes, 2^K) times.
    """
    if num_permutations < 1:
        raise ValueError("num_permutations must be >= 1")
    k = parts.k
    image_set = generate_set(image, parts)
    cache: dict[int, np.ndarray] = {}

    def logits_for(bits: int) -> np.ndarray:
        cached = cache.get(bits)
        if cached is None:
            cached = vf.evaluate_batch([image_set.render(Coalition(bits, k))])[0]
            cache[bits] = cached
        return cached

    if num_permutations >= factorial(k):
        orderings = itertools.permutations(range(k))
        count = factorial(k)
    else:
        rng = np.random.default_rng(seed)
        orderings = (tuple(rng.permutation(k)) for _ in range(num_permutations))
        count = num_permutations

    totals = np.zeros((k, vf.num_classes), dtype=np.float64)
    for ordering in orderings:
        bits = 0
        prev = logits_for(0)
        for part in ordering:
            bits |= 1 << part
            cur = logits_for(bits)
            totals[part] += cur - prev
            prev = cur
    values = totals / count

    return PartShapleyMatrix(
        values=values,
        part_names=parts.names,
        class_names=vf.class_names,
        coalition_logits=dict(cache),
    )
