import json

import numpy as np
import pytest

from partshap import (
    AdditiveToyModel,
    CallableValueFunction,
    Coalition,
    CountingValueFunction,
    RasterImage,
    TableToyModel,
    evaluate,
    evaluate_batch,
    generate_set,
)
from partshap.errors import NonFiniteLogit, PartShapError
from partshap.models import additive_from_config, decode_present_parts, table_from_config
from partshap.testkit import make_part_grid_image


@pytest.fixture
def game3():
    image, parts, fill = make_part_grid_image(3)
    return image, parts, fill


def test_additive_full_and_empty(game3):
    image, parts, fill = game3
    weights = np.array([[2.0, -2.0], [1.0, -1.0], [0.5, 0.25]])
    bias = np.array([0.5, -0.5])
    model = AdditiveToyModel(parts, weights, bias, fill_value=fill)
    image_set = generate_set(image, parts)
    full = evaluate(model, image_set.render(Coalition(0b111, 3)))
    empty = evaluate(model, image_set.render(Coalition(0b000, 3)))
    assert np.array_equal(full, bias + weights.sum(axis=0))
    assert np.array_equal(empty, bias)


def test_additive_exact_on_every_masked_variant(game3):
    image, parts, fill = game3
    weights = np.array([[2.0, -2.0], [1.0, -1.0], [4.0, 8.0]])
    bias = np.array([1.0, 2.0])
    model = AdditiveToyModel(parts, weights, bias, fill_value=fill)
    image_set = generate_set(image, parts)
    for coalition, variant in image_set.images():
        mask = np.array([coalition.contains(k) for k in range(3)])
        expected = bias + weights[mask].sum(axis=0)
        assert np.array_equal(model.evaluate(variant), expected)


def test_table_lookup_by_coalition(game3):
    image, parts, fill = game3
    table = {bits: [float(bits), float(-bits)] for bits in range(8)}
    model = TableToyModel(parts, table, fill_value=fill)
    image_set = generate_set(image, parts)
    got = model.evaluate(image_set.render(Coalition(0b101, 3)))
    assert np.array_equal(got, np.array([5.0, -5.0]))


def test_table_requires_complete_coverage(game3):
    _, parts, _ = game3
    with pytest.raises(PartShapError, match="cover"):
        TableToyModel(parts, {0: [0.0, 0.0]})


def test_determinism_same_bytes_same_logits(game3):
    image, parts, fill = game3
    model = AdditiveToyModel(parts, np.ones((3, 2)), np.zeros(2), fill_value=fill)
    a = model.evaluate(image)
    b = model.evaluate(RasterImage(image.pixels.copy()))
    assert a.tobytes() == b.tobytes()


def test_batch_matches_map_and_preserves_order(game3):
    image, parts, fill = game3
    model = AdditiveToyModel(parts, np.arange(6).reshape(3, 2) * 1.0, np.zeros(2), fill_value=fill)
    image_set = generate_set(image, parts)
    images = [image_set.render(c) for c in image_set.space.coalitions()]
    batch = evaluate_batch(model, images)
    assert batch.shape == (8, 2)
    for i, img in enumerate(images):
        assert np.array_equal(batch[i], model.evaluate(img))
    # permuted input -> permuted output
    perm = [3, 0, 7, 5, 1, 2, 6, 4]
    permuted = evaluate_batch(model, [images[i] for i in perm])
    assert np.array_equal(permuted, batch[perm])


def test_batch_of_one_and_empty_batch(game3):
    image, parts, fill = game3
    model = AdditiveToyModel(parts, np.ones((3, 2)), np.zeros(2), fill_value=fill)
    assert np.array_equal(evaluate_batch(model, [image])[0], model.evaluate(image))
    with pytest.raises(PartShapError):
        evaluate_batch(model, [])


def test_batch_error_names_index(game3):
    image, _, _ = game3
    calls = {"n": 0}

    def flaky(pixels):
        calls["n"] += 1
        return [0.0, float("inf")] if calls["n"] == 3 else [0.0, 1.0]

    model = CallableValueFunction(flaky, 2)
    with pytest.raises(NonFiniteLogit, match="batch index 2"):
        evaluate_batch(model, [image, image, image, image])


def test_non_finite_logits_rejected(game3):
    image, _, _ = game3
    model = CallableValueFunction(lambda px: [float("nan"), 1.0], 2)
    with pytest.raises(NonFiniteLogit):
        evaluate(model, image)


def test_counting_wrapper(game3):
    image, parts, fill = game3
    inner = AdditiveToyModel(parts, np.ones((3, 2)), np.zeros(2), fill_value=fill)
    counting = CountingValueFunction(inner)
    counting.evaluate(image)
    counting.evaluate_batch([image, image, image])
    assert counting.calls == 4


def test_presence_threshold_semantics():
    # a box half-filled with the fill value sits at 50% difference: present
    # below the threshold, absent above it
    arr = np.full((8, 8), 100, dtype=np.uint8)
    arr[0:4, 0:4] = 0  # top-left quadrant of the box differs from fill
    image = RasterImage(arr)
    parts_spec = [("p", (0, 0, 8, 8))]
    from partshap import part_set

    parts = part_set(parts_spec)
    bits_strict = decode_present_parts(
        image, parts, fill_value=(100,), presence_threshold=0.9
    )
    bits_loose = decode_present_parts(
        image, parts, fill_value=(100,), presence_threshold=0.2
    )
    assert bits_strict == 0
    assert bits_loose == 1


def test_fill_tolerance_absorbs_near_fill_pixels():
    arr = np.full((6, 6), 100, dtype=np.uint8)
    arr[:, :3] = 104  # close to fill but not equal
    image = RasterImage(arr)
    from partshap import part_set

    parts = part_set([("p", (0, 0, 6, 6))])
    assert decode_present_parts(image, parts, fill_value=(100,), presence_threshold=0.4) == 1
    assert (
        decode_present_parts(
            image, parts, fill_value=(100,), presence_threshold=0.4, fill_tolerance=8
        )
        == 0
    )


def test_additive_config_round_trip(tmp_path, game3):
    _, parts, fill = game3
    cfg = {
        "type": "additive",
        "class_names": ["left", "right"],
        "parts": [{"name": p.name, "box": list(p.box)} for p in parts],
        "weights": [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]],
        "bias": [0.0, 0.25],
        "presence_threshold": 0.8,
        "fill_tolerance": 3,
        "fill_value": list(fill),
    }
    path = tmp_path / "model.json"
    path.write_text(json.dumps(cfg))
    model = additive_from_config(path)
    assert model.class_names == ("left", "right")
    assert model.presence_threshold == 0.8
    assert model.fill_tolerance == 3
    assert np.array_equal(model.logits_for_bits(0b101), np.array([1.5, 0.75]))


def test_table_config_round_trip(tmp_path, game3):
    _, parts, _ = game3
    table = {format(bits, "03b"): [float(bits), 0.0] for bits in range(8)}
    path = tmp_path / "table.json"
    path.write_text(
        json.dumps(
            {
                "type": "table",
                "class_names": ["a", "b"],
                "parts": [{"name": p.name, "box": list(p.box)} for p in parts],
                "table": table,
            }
        )
    )
    model = table_from_config(path)
    assert np.array_equal(model.table[0b110], np.array([6.0, 0.0]))
