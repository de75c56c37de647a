import numpy as np
import pytest

from partshap import SampleRecord, class_histogram, histogram_similarity, task_histogram
from partshap.errors import PartCountMismatch, ZeroVector

PARTS = ("hair", "eye", "foot")


def record(i, true, pred, k_star, histogram=None):
    if histogram is None:
        histogram = tuple(float(j) for j in range(len(PARTS)))
    return SampleRecord(
        sample_id=f"s{i}",
        true_label=true,
        predicted_label=pred,
        argmax_part=k_star,
        histogram=tuple(histogram),
        normalized=tuple(histogram),
    )


def test_counting_frequencies():
    records = [record(0, 0, 0, 0), record(1, 0, 0, 0), record(2, 0, 0, 2)]
    h = class_histogram(records, 0, part_names=PARTS)
    assert h.n_samples == 3
    assert np.array_equal(h.counts, np.array([2, 0, 1]))
    assert np.allclose(h.frequencies, [2 / 3, 0.0, 1 / 3])
    assert h.frequencies.sum() == pytest.approx(1.0, abs=1e-12)


def test_single_sample_one_hot():
    h = class_histogram([record(0, 1, 1, 1)], 1, part_names=PARTS)
    assert np.array_equal(h.frequencies, np.array([0.0, 1.0, 0.0]))


def test_correct_only_filter():
    # oracle: filter then count by hand -> only the two correct eye-records stay
    records = [
        record(0, 0, 0, 1),  # correct, k* = eye
        record(1, 0, 0, 1),  # correct, k* = eye
        record(2, 0, 1, 2),  # wrong prediction, k* = foot
    ]
    h = class_histogram(records, 0, part_names=PARTS)
    assert h.n_samples == 2
    assert np.array_equal(h.frequencies, np.array([0.0, 1.0, 0.0]))
    loose = class_histogram(records, 0, part_names=PARTS, correct_only=False)
    assert loose.n_samples == 3
    assert np.allclose(loose.frequencies, [0.0, 2 / 3, 1 / 3])


def test_true_label_always_required():
    # a foreign-class record never counts, correct filter or not
    records = [record(0, 1, 0, 2)]
    assert class_histogram(records, 0, part_names=PARTS).n_samples == 0
    assert (
        class_histogram(records, 0, part_names=PARTS, correct_only=False).n_samples
        == 0
    )


def test_empty_class_is_explicit_zero_histogram():
    h = class_histogram([], 0, part_names=PARTS)
    assert h.is_empty
    assert h.n_samples == 0
    assert np.array_equal(h.frequencies, np.zeros(3))


def test_mass_conservation_integer_identity():
    rng = np.random.default_rng(0)
    records = [
        record(i, 0, 0, int(rng.integers(0, 3))) for i in range(57)
    ]
    h = class_histogram(records, 0, part_names=PARTS)
    assert h.counts.sum() == h.n_samples == 57


def test_permutation_invariance():
    rng = np.random.default_rng(1)
    records = [
        record(i, int(rng.integers(0, 2)), int(rng.integers(0, 2)), int(rng.integers(0, 3)))
        for i in range(40)
    ]
    h0 = class_histogram(records, 0, part_names=PARTS)
    h1 = class_histogram(records, 1, part_names=PARTS)
    for trial in range(5):
        shuffled = list(records)
        rng.shuffle(shuffled)
        assert np.array_equal(class_histogram(shuffled, 0, part_names=PARTS).counts, h0.counts)
        assert np.array_equal(class_histogram(shuffled, 1, part_names=PARTS).counts, h1.counts)
        t = task_histogram(
            [
                class_histogram(shuffled, 0, part_names=PARTS),
                class_histogram(shuffled, 1, part_names=PARTS),
            ]
        )
        assert np.array_equal(t.values, h0.frequencies + h1.frequencies)


def test_task_histogram_elementwise_sum():
    # craft frequencies [0.6, 0.4] and [0.2, 0.8]
    recs1 = [record(i, 0, 0, 0 if i < 3 else 1, histogram=(0.0, 0.0)) for i in range(5)]
    recs2 = [record(i, 1, 1, 0 if i < 1 else 1, histogram=(0.0, 0.0)) for i in range(5)]
    a = class_histogram(recs1, 0, part_names=("a", "b"))
    b = class_histogram(recs2, 1, part_names=("a", "b"))
    assert np.allclose(a.frequencies, [0.6, 0.4])
    assert np.allclose(b.frequencies, [0.2, 0.8])
    t = task_histogram([a, b])
    assert np.allclose(t.values, [0.8, 1.2])
    assert t.contributing_classes == 2


def test_task_histogram_identity_and_empty_class():
    a = class_histogram([record(0, 0, 0, 1)], 0, part_names=PARTS)
    assert np.array_equal(task_histogram([a]).values, a.frequencies)
    empty = class_histogram([], 1, part_names=PARTS)
    t = task_histogram([a, empty])
    assert np.array_equal(t.values, a.frequencies)
    assert t.contributing_classes == 1
    # invariant: total mass equals the number of non-empty classes
    assert t.values.sum() == pytest.approx(t.contributing_classes, abs=1e-12)


def test_task_histogram_rejects_mismatched_parts():
    a = class_histogram([], 0, part_names=("a", "b"))
    b = class_histogram([], 1, part_names=("a", "b", "c"))
    with pytest.raises(PartCountMismatch):
        task_histogram([a, b])


def test_missing_parts_tolerated_in_mean():
    records = [
        record(0, 0, 0, 0, histogram=(2.0, None, 1.0)),
        record(1, 0, 0, 0, histogram=(4.0, 3.0, None)),
    ]
    h = class_histogram(records, 0, part_names=PARTS)
    assert h.mean_contribution[0] == pytest.approx(3.0)
    assert h.mean_contribution[1] == pytest.approx(3.0)
    assert h.mean_contribution[2] == pytest.approx(1.0)


def test_cosine_identical_vectors():
    assert histogram_similarity([1.0, 2.0, 0.5], [1.0, 2.0, 0.5]) == pytest.approx(1.0)


def test_cosine_orthogonal_one_hots():
    assert histogram_similarity([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)


def test_cosine_scale_invariance():
    assert histogram_similarity([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]) == pytest.approx(1.0)


def test_cosine_zero_vector_rejected():
    with pytest.raises(ZeroVector):
        histogram_similarity([0.0, 0.0], [1.0, 0.0])


def test_cosine_shape_mismatch():
    with pytest.raises(PartCountMismatch):
        histogram_similarity([1.0, 0.0], [1.0, 0.0, 0.0])
