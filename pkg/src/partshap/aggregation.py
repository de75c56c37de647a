"""Class- and task-level aggregation of per-sample results.

A class histogram is the frequency with which each part is the top
contributor among a class's samples (correctly predicted ones only, unless
asked otherwise); the task histogram is the elementwise sum of the class
histograms. Samples missing some vocabulary parts still count: their argmax
indexes into the full vocabulary and their absent parts carry None.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import PartCountMismatch, PartShapError, ZeroVector


@dataclass(frozen=True)
class SampleRecord:
    """One explained sample, already projected onto the part vocabulary."""

    sample_id: str
    true_label: int
    predicted_label: int
    argmax_part: int
    histogram: tuple  # per vocabulary part: float, or None when unannotated
    normalized: tuple
    degenerate_normalization: bool = False

    @property
    def correct(self) -> bool:
        return self.true_label == self.predicted_label


@dataclass
class ClassHistogram:
    """Per-part argmax frequencies for one class (unit mass when non-empty)."""

    class_index: int
    class_name: str
    part_names: tuple[str, ...]
    counts: np.ndarray
    n_samples: int
    mean_contribution: np.ndarray = field(default=None)  # aux: mean raw histogram

    @property
    def k(self) -> int:
        return len(self.part_names)

    @property
    def frequencies(self) -> np.ndarray:
        if self.n_samples == 0:
            return np.zeros(self.k, dtype=np.float64)
        return self.counts / self.n_samples

    @property
    def is_empty(self) -> bool:
        return self.n_samples == 0


@dataclass
class TaskHistogram:
    """Elementwise sum of class histograms; total mass = non-empty classes."""

    part_names: tuple[str, ...]
    values: np.ndarray
    contributing_classes: int


def class_histogram(
    records: Iterable[SampleRecord],
    class_index: int,
    *,
    class_name: str | None = None,
    part_names: Sequence[str],
    correct_only: bool = True,
) -> ClassHistogram:
    """Tally each sample's top part for one class.

    With correct_only (the default), a record contributes only when both its
    true and predicted labels equal `class_index`. An empty class yields an
    explicit zero histogram, not an error, so task aggregation can proceed.
    """
    part_names = tuple(part_names)
    counts = np.zeros(len(part_names), dtype=np.int64)
    sums = np.zeros(len(part_names), dtype=np.float64)
    present = np.zeros(len(part_names), dtype=np.int64)
    n = 0
    for rec in records:
        if rec.true_label != class_index:
            continue
        if correct_only and rec.predicted_label != class_index:
            continue
        if len(rec.histogram) != len(part_names):
            raise PartCountMismatch(
                f"record {rec.sample_id!r} has {len(rec.histogram)} parts, "
                f"expected {len(part_names)}"
            )
        if not 0 <= rec.argmax_part < len(part_names):
            raise PartShapError(
                f"record {rec.sample_id!r}: argmax part {rec.argmax_part} "
                f"outside vocabulary"
            )
        counts[rec.argmax_part] += 1
        n += 1
        for i, v in enumerate(rec.histogram):
            if v is not None and not (isinstance(v, float) and math.isnan(v)):
                sums[i] += v
                present[i] += 1
    mean = np.divide(sums, present, out=np.full(len(part_names), np.nan), where=present > 0)
    return ClassHistogram(
        class_index=class_index,
        class_name=class_name if class_name is not None else str(class_index),
        part_names=part_names,
        counts=counts,
        n_samples=n,
        mean_contribution=mean,
    )


def task_histogram(class_histograms: Sequence[ClassHistogram]) -> TaskHistogram:
    """Sum class-level frequencies elementwise across classes."""
    if not class_histograms:
        raise PartShapError("task_histogram needs at least one class histogram")
    part_names = class_histograms[0].part_names
    for h in class_histograms[1:]:
        if h.part_names != part_names:
            raise PartCountMismatch(
                f"class {h.class_name!r} has parts {h.part_names}, "
                f"expected {part_names}"
            )
    values = np.zeros(len(part_names), dtype=np.float64)
    contributing = 0
    for h in class_histograms:
        values += h.frequencies
        if not h.is_empty:
            contributing += 1
    return TaskHistogram(
        part_names=part_names, values=values, contributing_classes=contributing
    )


def histogram_similarity(a, b) -> float:
    """Cosine similarity of two per-part vectors, in [-1, 1]."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise PartCountMismatch(f"shape mismatch: {va.shape} vs {vb.shape}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))
