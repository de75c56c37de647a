"""Controlled validation runs: part inclusion / exclusion accuracy and
robustness of class histograms to annotation quality.

Inclusion renders every sample at the coalition containing one part only
(the region outside all boxes always stays); exclusion renders the
complement. If the contribution ranking is faithful, the top-ranked part
should win the inclusion comparison and hurt most when excluded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .aggregation import histogram_similarity
from .coalitions import Coalition
from .errors import PartCountOutOfRange, VocabularyMismatch, ZeroVector
from .manifest import DatasetManifest, LabeledSample
from .masking import generate_set
from .models import ValueFunction
from .pipeline import build_class_histograms, explain_dataset


def _check_full_vocabulary(
    samples: Sequence[LabeledSample], vocabulary: Sequence[str]
) -> None:
    # paired design: every part's accuracy must come from the same sample set,
    # so samples missing vocabulary parts are rejected rather than skipped
    vocab = tuple(vocabulary)
    for s in samples:
        if s.parts.names != vocab:
            raise VocabularyMismatch(
                f"sample {s.sample_id!r} annotates {s.parts.names}, "
                f"inclusion/exclusion runs need the full vocabulary {vocab}"
            )


def _coalition_accuracy(
    vf: ValueFunction,
    samples: Sequence[LabeledSample],
    num_classes: int,
    bits_for_part: Callable[[int, int], int],
) -> np.ndarray:
    """Accuracy[k][c] of predictions on per-part coalition renders.

    Classes with no samples get NaN.
    """
    k = samples[0].parts.k
    hits = np.zeros((k, num_classes), dtype=np.int64)
    totals = np.zeros(num_classes, dtype=np.int64)
    for sample in samples:
        totals[sample.label_index] += 1
        image_set = generate_set(sample.image, sample.parts)
        for part in range(k):
            coalition = Coalition(bits_for_part(part, k), k)
            logits = vf.evaluate(image_set.render(coalition))
            if int(np.argmax(logits)) == sample.label_index:
                hits[part, sample.label_index] += 1
    with np.errstate(invalid="ignore"):
        return np.where(totals > 0, hits / totals, np.nan)


def run_inclusion(
    vf: ValueFunction,
    samples: Sequence[LabeledSample],
    vocabulary: Sequence[str],
) -> np.ndarray:
    """Accuracy per (part, class) with only that part present."""
    if len(vocabulary) < 2:
        raise PartCountOutOfRange("inclusion runs need at least 2 parts")
    _check_full_vocabulary(samples, vocabulary)
    return _coalition_accuracy(
        vf, samples, vf.num_classes, lambda part, k: 1 << part
    )


def run_exclusion(
    vf: ValueFunction,
    samples: Sequence[LabeledSample],
    vocabulary: Sequence[str],
) -> np.ndarray:
    """Accuracy per (part, class) with that part removed; K=1 would leave nothing."""
    if len(vocabulary) < 2:
        raise PartCountOutOfRange("exclusion with K=1 leaves no parts present")
    _check_full_vocabulary(samples, vocabulary)
    return _coalition_accuracy(
        vf, samples, vf.num_classes, lambda part, k: ((1 << k) - 1) & ~(1 << part)
    )


@dataclass
class InclusionExclusionReport:
    part_names: tuple[str, ...]
    class_names: tuple[str, ...]
    inclusion_accuracy: np.ndarray  # (K, C)
    exclusion_accuracy: np.ndarray  # (K, C)
    inclusion_overall: np.ndarray  # (K,)
    exclusion_overall: np.ndarray  # (K,)
    class_contribution: np.ndarray  # (K, C) class-level argmax frequencies
    class_part_order: tuple  # per class: part indices, descending contribution
    n_per_class: tuple[int, ...]

    def rows(self):
        """Flat (class, part, contribution, inclusion, exclusion) rows for CSV."""
        for c, cname in enumerate(self.class_names):
            for k in self.class_part_order[c]:
                yield (
                    cname,
                    self.part_names[k],
                    float(self.class_contribution[k, c]),
                    float(self.inclusion_accuracy[k, c]),
                    float(self.exclusion_accuracy[k, c]),
                )


def inclusion_exclusion_report(
    vf: ValueFunction,
    samples: Sequence[LabeledSample],
    vocabulary: Sequence[str],
    *,
    correct_only: bool = True,
) -> InclusionExclusionReport:
    """Join the contribution ranking with both accuracy grids, parts ordered
    by descending class-level contribution."""
    samples = list(samples)
    inclusion = run_inclusion(vf, samples, vocabulary)
    exclusion = run_exclusion(vf, samples, vocabulary)
    records = explain_dataset(vf, samples, vocabulary)
    histos = build_class_histograms(
        records, vf.class_names, vocabulary, correct_only=correct_only
    )
    contribution = np.stack([h.frequencies for h in histos], axis=1)
    order = tuple(
        tuple(int(i) for i in np.argsort(-contribution[:, c], kind="stable"))
        for c in range(vf.num_classes)
    )
    per_class = np.zeros(vf.num_classes, dtype=np.int64)
    for s in samples:
        per_class[s.label_index] += 1
    overall_w = per_class / per_class.sum()
    return InclusionExclusionReport(
        part_names=tuple(vocabulary),
        class_names=vf.class_names,
        inclusion_accuracy=inclusion,
        exclusion_accuracy=exclusion,
        inclusion_overall=np.nansum(inclusion * overall_w, axis=1),
        exclusion_overall=np.nansum(exclusion * overall_w, axis=1),
        class_contribution=contribution,
        class_part_order=order,
        n_per_class=tuple(int(n) for n in per_class),
    )


@dataclass
class AnnotationComparison:
    class_names: tuple[str, ...]
    per_class: tuple  # cosine per class; None when a side has no mass
    average: float


def compare_annotation_sources(
    vf: ValueFunction,
    manifest_a: DatasetManifest,
    manifest_b: DatasetManifest,
    *,
    correct_only: bool = True,
    jobs: int = 1,
) -> AnnotationComparison:
    """Class-histogram cosine similarity between two annotation sources."""
    if manifest_a.part_vocabulary != manifest_b.part_vocabulary:
        raise VocabularyMismatch(
            f"part vocabularies differ: {manifest_a.part_vocabulary} "
            f"vs {manifest_b.part_vocabulary}"
        )
    if manifest_a.classes != manifest_b.classes:
        raise VocabularyMismatch(
            f"class lists differ: {manifest_a.classes} vs {manifest_b.classes}"
        )
    ids_a = [r.sample_id for r in manifest_a.records]
    ids_b = [r.sample_id for r in manifest_b.records]
    if ids_a != ids_b:
        raise VocabularyMismatch("the two sources cover different samples")

    vocabulary = manifest_a.part_vocabulary
    similarities = []
    histos = []
    for m in (manifest_a, manifest_b):
        records = explain_dataset(vf, list(m.samples()), vocabulary, jobs=jobs)
        histos.append(
            build_class_histograms(
                records, m.classes, vocabulary, correct_only=correct_only
            )
        )
    for ha, hb in zip(*histos):
        try:
            similarities.append(
                histogram_similarity(ha.frequencies, hb.frequencies)
            )
        except ZeroVector:
            similarities.append(None)
    valid = [s for s in similarities if s is not None]
    average = float(np.mean(valid)) if valid else float("nan")
    return AnnotationComparison(
        class_names=manifest_a.classes,
        per_class=tuple(similarities),
        average=average,
    )
