import numpy as np
import pytest

from partshap import DatasetManifest
from partshap.pipeline import build_class_histograms, explain_dataset
from partshap.testkit import make_synthetic_dataset


def tree_bytes(root):
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_same_seed_identical_bytes(tmp_path):
    a = make_synthetic_dataset(11, k=4, num_classes=2, n_per_class=3, out_dir=tmp_path / "a")
    b = make_synthetic_dataset(11, k=4, num_classes=2, n_per_class=3, out_dir=tmp_path / "b")
    assert tree_bytes(a.root) == tree_bytes(b.root)
    c = make_synthetic_dataset(12, k=4, num_classes=2, n_per_class=3, out_dir=tmp_path / "c")
    assert tree_bytes(c.root) != tree_bytes(a.root)


def test_manifest_schema_valid(tmp_path):
    data = make_synthetic_dataset(13, k=4, num_classes=2, n_per_class=2, out_dir=tmp_path)
    reloaded = DatasetManifest.load(data.manifest_path)
    assert len(reloaded.records) == 4
    for rec in reloaded.records:
        assert (data.root / rec.image_path).exists()


def test_empty_dataset_schema_valid(tmp_path):
    data = make_synthetic_dataset(14, k=3, num_classes=2, n_per_class=0, out_dir=tmp_path)
    reloaded = DatasetManifest.load(data.manifest_path)
    assert reloaded.records == ()
    assert reloaded.part_vocabulary == ("hair", "eye", "nose")


def test_markers_drive_class_histograms(tmp_path):
    # class 0 marked by hair, class 1 by foot: the matched model must
    # concentrate each class histogram on its marker
    data = make_synthetic_dataset(
        15,
        k=4,
        num_classes=2,
        n_per_class=6,
        out_dir=tmp_path,
        markers=("hair", "mouth"),
    )
    assert data.markers == ("hair", "mouth")
    samples = list(data.manifest.samples())
    records = explain_dataset(data.model, samples, data.manifest.part_vocabulary)
    assert all(r.correct for r in records)
    histos = build_class_histograms(
        records, data.manifest.classes, data.manifest.part_vocabulary
    )
    vocab = data.manifest.part_vocabulary
    for c, marker in enumerate(data.markers):
        freqs = histos[c].frequencies
        assert freqs[vocab.index(marker)] == pytest.approx(1.0)


def test_missing_markers_recorded_as_none(tmp_path):
    data = make_synthetic_dataset(16, k=3, num_classes=2, n_per_class=1, out_dir=tmp_path)
    samples = list(data.manifest.samples())
    records = explain_dataset(data.model, samples, data.manifest.part_vocabulary)
    vocab = data.manifest.part_vocabulary
    for rec, sample in zip(records, samples):
        absent = set(vocab) - set(sample.parts.names)
        for name in absent:
            assert rec.histogram[vocab.index(name)] is None


def test_generator_validates_arguments(tmp_path):
    with pytest.raises(ValueError):
        make_synthetic_dataset(0, k=9, num_classes=2, n_per_class=1, out_dir=tmp_path)
    with pytest.raises(ValueError):
        make_synthetic_dataset(0, k=2, num_classes=3, n_per_class=1, out_dir=tmp_path)
    with pytest.raises(ValueError):
        make_synthetic_dataset(
            0, k=3, num_classes=2, n_per_class=1, out_dir=tmp_path, markers=("hair", "tail")
        )


def test_overlapping_layout_produces_overlaps(tmp_path):
    data = make_synthetic_dataset(
        17, k=4, num_classes=2, n_per_class=1, out_dir=tmp_path, overlapping=True
    )
    boxes = list(data.part_boxes.values())

    def overlap(a, b):
        return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]

    assert any(
        overlap(boxes[i], boxes[j])
        for i in range(len(boxes))
        for j in range(i + 1, len(boxes))
    )


def test_additive_model_weights_match_markers(tmp_path):
    data = make_synthetic_dataset(18, k=4, num_classes=2, n_per_class=1, out_dir=tmp_path)
    vocab = data.manifest.part_vocabulary
    weights = data.model.weights
    for c, marker in enumerate(data.markers):
        assert weights[vocab.index(marker), c] > 0
        others = [weights[i, c] for i in range(len(vocab)) if vocab[i] != marker]
        assert np.all(np.array(others) == 0.0)
