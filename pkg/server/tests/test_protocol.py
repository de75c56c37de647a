import base64
import io
import json

import numpy as np
import pytest
from PIL import Image as PILImage

from logit_server import ServerConfig, handle_line, handle_message, quadrant_brightness_model


def png_b64(pixels: np.ndarray) -> str:
    buf = io.BytesIO()
    mode = "L" if pixels.ndim == 2 else "RGB"
    PILImage.fromarray(pixels, mode=mode).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


@pytest.fixture
def config():
    return ServerConfig(model=quadrant_brightness_model(2), class_names=("a", "b"))


@pytest.fixture
def image_data():
    rng = np.random.default_rng(0)
    return png_b64(rng.integers(0, 256, size=(16, 16), dtype=np.uint8))


def test_hello(config):
    response = handle_message({"type": "hello"}, config)
    assert response == {"type": "hello", "num_classes": 2, "class_names": ["a", "b"]}


def test_predict_deterministic(config, image_data):
    msg = {"type": "predict", "id": 5, "format": "png", "data": image_data}
    first = handle_message(msg, config)
    second = handle_message(msg, config)
    assert first["type"] == "logits"
    assert first["id"] == 5
    assert len(first["values"]) == 2
    assert first == second


def test_unparsable_line_gets_error_id_zero(config):
    response = handle_line("{broken json", config)
    assert response["type"] == "error"
    assert response["id"] == 0


def test_unknown_type_is_error_with_id(config):
    response = handle_message({"type": "train", "id": 9}, config)
    assert response == {
        "type": "error",
        "id": 9,
        "message": "unknown request type 'train'",
    }


def test_bad_base64_is_error_not_crash(config):
    response = handle_message(
        {"type": "predict", "id": 3, "format": "png", "data": "@@@not-base64@@@"},
        config,
    )
    assert response["type"] == "error"
    assert response["id"] == 3


def test_bad_image_bytes_is_error(config):
    data = base64.b64encode(b"definitely not a png").decode("ascii")
    response = handle_message(
        {"type": "predict", "id": 4, "format": "png", "data": data}, config
    )
    assert response["type"] == "error"
    assert response["id"] == 4


def test_unsupported_format_rejected(config, image_data):
    response = handle_message(
        {"type": "predict", "id": 6, "format": "jpeg", "data": image_data}, config
    )
    assert response["type"] == "error"


def test_missing_id_rejected(config, image_data):
    response = handle_message(
        {"type": "predict", "format": "png", "data": image_data}, config
    )
    assert response["type"] == "error"
    assert response["id"] == 0


def test_plugin_exception_becomes_error_and_server_survives(image_data):
    calls = {"n": 0}

    def exploding(pixels):
        calls["n"] += 1
        if calls["n"] == 1:
            raise RuntimeError("cuda out of memory")
        return [0.0, 1.0]

    config = ServerConfig(model=exploding, class_names=("a", "b"))
    first = handle_message(
        {"type": "predict", "id": 1, "format": "png", "data": image_data}, config
    )
    assert first["type"] == "error"
    assert "cuda out of memory" in first["message"]
    second = handle_message(
        {"type": "predict", "id": 2, "format": "png", "data": image_data}, config
    )
    assert second == {"type": "logits", "id": 2, "values": [0.0, 1.0]}


def test_wrong_output_length_is_error(image_data):
    config = ServerConfig(model=lambda px: [1.0, 2.0, 3.0], class_names=("a", "b"))
    response = handle_message(
        {"type": "predict", "id": 7, "format": "png", "data": image_data}, config
    )
    assert response["type"] == "error"
    assert "expected 2" in response["message"]


def test_rgb_and_grayscale_images_decode(config):
    rng = np.random.default_rng(1)
    gray = png_b64(rng.integers(0, 256, size=(8, 8), dtype=np.uint8))
    rgb = png_b64(rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8))
    for data in (gray, rgb):
        response = handle_message(
            {"type": "predict", "id": 1, "format": "png", "data": data}, config
        )
        assert response["type"] == "logits"
        assert all(isinstance(v, float) for v in response["values"])


def test_full_double_precision_round_trip(image_data):
    config = ServerConfig(
        model=lambda px: [0.1 + 0.2, 1 / 3], class_names=("a", "b")
    )
    response = handle_message(
        {"type": "predict", "id": 1, "format": "png", "data": image_data}, config
    )
    wire = json.dumps(response)
    assert json.loads(wire)["values"] == [0.1 + 0.2, 1 / 3]
