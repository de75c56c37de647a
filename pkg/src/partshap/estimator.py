"""Scikit-learn style facade over the explanation pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .aggregation import task_histogram
from .engine import explain_sample, select_target
from .errors import EmptyDataset
from .manifest import LabeledSample
from .models import ValueFunction
from .pipeline import build_class_histograms, explain_dataset
from .validation import check_sample


class ShapleyPartExplainer(BaseEstimator, TransformerMixin):
    """Per-part contribution explainer with the estimator API.

    Fit on a sequence of labeled samples to aggregate class- and task-level
    histograms; transform maps samples to their per-part contribution
    vectors over the shared vocabulary (NaN where a sample lacks a part).

    Parameters
    ----------
    model : ValueFunction
        The classifier under explanation.
    target_class : int or None
        Class column for per-sample histograms; None uses the model's
        prediction on the unmasked image.
    correct_only : bool
        Restrict class/task aggregation to correctly predicted samples.
    mc_permutations : int or None
        None computes exact values; an int switches to the seeded
        permutation-sampling estimator.
    seed : int
        Seed for the sampling estimator.
    n_jobs : int
        Worker threads for dataset runs.

    Attributes
    ----------
    part_vocabulary_ : tuple of str
    records_ : list of SampleRecord
    class_histograms_ : list of ClassHistogram
    task_histogram_ : TaskHistogram
    """

    def __init__(
        self,
        model: ValueFunction = None,
        *,
        target_class: int | None = None,
        correct_only: bool = True,
        mc_permutations: int | None = None,
        seed: int = 0,
        n_jobs: int = 1,
    ):
        self.model = model
        self.target_class = target_class
        self.correct_only = correct_only
        self.mc_permutations = mc_permutations
        self.seed = seed
        self.n_jobs = n_jobs

    def _vocabulary(self, samples) -> tuple[str, ...]:
        vocab: list[str] = []
        for s in samples:
            for name in s.parts.names:
                if name not in vocab:
                    vocab.append(name)
        return tuple(vocab)

    def fit(self, X, y=None):
        """Explain every sample and aggregate.

        X is a sequence of LabeledSample; y optionally overrides the label
        indices (useful when samples carry no labels of their own).
        """
        if self.model is None:
            raise ValueError("ShapleyPartExplainer needs a model to explain")
        samples = list(X)
        if not samples:
            raise EmptyDataset("cannot fit on an empty sample sequence")
        if y is not None:
            samples = [
                LabeledSample(
                    sample_id=s.sample_id,
                    image=s.image,
                    parts=s.parts,
                    label_index=int(label),
                    vocab_indices=s.vocab_indices,
                )
                for s, label in zip(samples, y)
            ]
        self.part_vocabulary_ = self._vocabulary(samples)
        self.records_ = explain_dataset(
            self.model,
            samples,
            self.part_vocabulary_,
            target_class=self.target_class,
            mc_permutations=self.mc_permutations,
            seed=self.seed,
            jobs=self.n_jobs,
        )
        self.class_histograms_ = build_class_histograms(
            self.records_,
            self.model.class_names,
            self.part_vocabulary_,
            correct_only=self.correct_only,
        )
        self.task_histogram_ = task_histogram(self.class_histograms_)
        return self

    def transform(self, X) -> np.ndarray:
        """(n_samples, n_vocabulary_parts) raw contribution vectors."""
        check_is_fitted(self, "part_vocabulary_")
        records = explain_dataset(
            self.model,
            list(X),
            self.part_vocabulary_,
            target_class=self.target_class,
            mc_permutations=self.mc_permutations,
            seed=self.seed,
            jobs=self.n_jobs,
        )
        out = np.full((len(records), len(self.part_vocabulary_)), np.nan)
        for i, rec in enumerate(records):
            for j, v in enumerate(rec.histogram):
                if v is not None:
                    out[i, j] = v
        return out

    def explain(self, image, parts):
        """One-off sample explanation; accepts raw arrays and (name, box) pairs.

        Returns (PartShapleyMatrix, SampleContribution).
        """
        img, ps = check_sample(image, parts)
        matrix = explain_sample(self.model, img, ps)
        mode = "predicted" if self.target_class is None else self.target_class
        return matrix, select_target(matrix, mode)
