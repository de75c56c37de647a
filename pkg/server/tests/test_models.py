import json

import numpy as np
import pytest

from logit_server import box_additive_model, load_plugin, quadrant_brightness_model


def test_quadrant_model_deterministic_and_sized():
    model = quadrant_brightness_model(3)
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, size=(20, 30, 3), dtype=np.uint8)
    a = model(pixels)
    b = model(pixels.copy())
    assert a == b
    assert len(a) == 3
    assert all(np.isfinite(a))


def test_quadrant_model_distinguishes_quadrants():
    model = quadrant_brightness_model(2)
    dark_tl = np.full((16, 16), 255, dtype=np.uint8)
    dark_tl[:8, :8] = 0
    dark_br = np.full((16, 16), 255, dtype=np.uint8)
    dark_br[8:, 8:] = 0
    assert model(dark_tl) != model(dark_br)


def test_quadrant_model_single_pixel_image():
    model = quadrant_brightness_model(2)
    out = model(np.array([[7]], dtype=np.uint8))
    assert len(out) == 2 and all(np.isfinite(out))


def test_quadrant_model_rejects_single_class():
    with pytest.raises(ValueError):
        quadrant_brightness_model(1)


@pytest.fixture
def additive_config(tmp_path):
    cfg = {
        "class_names": ["a", "b"],
        "parts": [
            {"name": "left", "box": [0, 0, 4, 4]},
            {"name": "right", "box": [8, 0, 12, 4]},
        ],
        "weights": [[3.0, 0.0], [0.0, 2.0]],
        "bias": [0.5, -0.5],
        "presence_threshold": 0.9,
        "fill_value": [200],
    }
    path = tmp_path / "model.json"
    path.write_text(json.dumps(cfg))
    return path


def test_box_additive_presence_math(additive_config):
    model = box_additive_model(str(additive_config))
    pixels = np.full((8, 16), 200, dtype=np.uint8)  # everything at fill: nothing present
    assert model(pixels) == [0.5, -0.5]
    pixels[0:4, 0:4] = 10  # left part drawn
    assert model(pixels) == [3.5, -0.5]
    pixels[0:4, 8:12] = 10  # both parts drawn
    assert model(pixels) == [3.5, 1.5]


def test_load_plugin_from_file(tmp_path):
    plugin = tmp_path / "plugin.py"
    plugin.write_text(
        "def constant(pixels):\n"
        "    return [1.0, 2.0]\n"
        "\n"
        "def make_scaled(arg):\n"
        "    scale = float(arg)\n"
        "    return lambda pixels: [scale, -scale]\n"
    )
    direct = load_plugin(f"{plugin}:constant")
    assert direct(np.zeros((2, 2), dtype=np.uint8)) == [1.0, 2.0]
    factory = load_plugin(f"{plugin}:make_scaled:2.5")
    assert factory(np.zeros((2, 2), dtype=np.uint8)) == [2.5, -2.5]


def test_load_plugin_from_module(additive_config):
    fn = load_plugin(f"logit_server.models:box_additive_model:{additive_config}")
    assert fn(np.full((8, 16), 200, dtype=np.uint8)) == [0.5, -0.5]


def test_load_plugin_bad_specs(tmp_path):
    with pytest.raises(ValueError):
        load_plugin("no_attribute_given")
    plugin = tmp_path / "p.py"
    plugin.write_text("value = 42\n")
    with pytest.raises(ValueError):
        load_plugin(f"{plugin}:value")
