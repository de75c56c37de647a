"""Dataset-level orchestration: explain every sample, project onto the
vocabulary, aggregate. Shared by the estimator facade, the sanity harness
and the CLI."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from .aggregation import ClassHistogram, SampleRecord, class_histogram
from .engine import estimate_shapley_mc, explain_sample, select_target
from .manifest import LabeledSample
from .models import ValueFunction


def explain_one(
    vf: ValueFunction,
    sample: LabeledSample,
    *,
    mc_permutations: int | None = None,
    seed: int = 0,
):
    if mc_permutations is None:
        return explain_sample(vf, sample.image, sample.parts)
    return estimate_shapley_mc(vf, sample.image, sample.parts, mc_permutations, seed)


def record_from_matrix(
    sample: LabeledSample,
    matrix,
    vocabulary: Sequence[str],
    *,
    target_class: int | None = None,
) -> SampleRecord:
    """Project a sample's contribution matrix onto the full vocabulary.

    Parts the sample does not annotate get None in both histograms; the
    argmax part index refers to the vocabulary, not the sample-local order.
    """
    contribution = select_target(
        matrix, "predicted" if target_class is None else target_class
    )
    histogram: list[float | None] = [None] * len(vocabulary)
    normalized: list[float | None] = [None] * len(vocabulary)
    for local, vocab_idx in enumerate(sample.vocab_indices):
        histogram[vocab_idx] = float(contribution.histogram[local])
        normalized[vocab_idx] = float(contribution.normalized[local])
    return SampleRecord(
        sample_id=sample.sample_id,
        true_label=sample.label_index,
        predicted_label=matrix.predicted_class(),
        argmax_part=sample.vocab_indices[contribution.argmax_part],
        histogram=tuple(histogram),
        normalized=tuple(normalized),
        degenerate_normalization=contribution.degenerate_normalization,
    )


def record_for_sample(
    vf: ValueFunction,
    sample: LabeledSample,
    vocabulary: Sequence[str],
    *,
    target_class: int | None = None,
    mc_permutations: int | None = None,
    seed: int = 0,
) -> SampleRecord:
    """Explain one sample and express the result over the full vocabulary."""
    matrix = explain_one(vf, sample, mc_permutations=mc_permutations, seed=seed)
    return record_from_matrix(sample, matrix, vocabulary, target_class=target_class)


def explain_dataset(
    vf: ValueFunction,
    samples: Sequence[LabeledSample],
    vocabulary: Sequence[str],
    *,
    target_class: int | None = None,
    mc_permutations: int | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> list[SampleRecord]:
    """Per-sample records in input order; `jobs` threads, deterministic merge."""

    def one(sample: LabeledSample) -> SampleRecord:
        return record_for_sample(
            vf,
            sample,
            vocabulary,
            target_class=target_class,
            mc_permutations=mc_permutations,
            seed=seed,
        )

    if jobs <= 1:
        return [one(s) for s in samples]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, samples))


def build_class_histograms(
    records: Sequence[SampleRecord],
    class_names: Sequence[str],
    vocabulary: Sequence[str],
    *,
    correct_only: bool = True,
) -> list[ClassHistogram]:
    return [
        class_histogram(
            records,
            c,
            class_name=name,
            part_names=vocabulary,
            correct_only=correct_only,
        )
        for c, name in enumerate(class_names)
    ]
