"""Message handling for the prediction protocol.

Requests and responses are JSON objects:

    {"type": "hello"}
        -> {"type": "hello", "num_classes": C, "class_names": [...]}
    {"type": "predict", "id": N, "format": "png", "data": "<base64>"}
        -> {"type": "logits", "id": N, "values": [C floats]}
        -> {"type": "error", "id": N, "message": "..."}   on any failure

A request that cannot even be parsed is answered with an error carrying
id 0. The handler never raises: one bad request must not take the server
down. Response ids always echo the request id untouched.
"""

from __future__ import annotations

import base64
import binascii
import io
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from PIL import Image as PILImage


@dataclass
class ServerConfig:
    model: Callable[[np.ndarray], Sequence[float]]
    class_names: tuple[str, ...]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


def decode_image(data_b64: str) -> np.ndarray:
    """Base64 image bytes -> (H, W, C) uint8 array, C in {1, 3}."""
    raw = base64.b64decode(data_b64, validate=True)
    with PILImage.open(io.BytesIO(raw)) as img:
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    return arr


def _error(request_id, message: str) -> dict:
    try:
        request_id = int(request_id)
    except (TypeError, ValueError):
        request_id = 0
    return {"type": "error", "id": request_id, "message": message}


def handle_line(line: str, config: ServerConfig) -> dict | None:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        return _error(0, f"unparsable request: {exc}")
    if not isinstance(msg, dict):
        return _error(0, "request must be a JSON object")
    return handle_message(msg, config)


def handle_message(msg: dict, config: ServerConfig) -> dict | None:
    kind = msg.get("type")
    if kind == "hello":
        return {
            "type": "hello",
            "num_classes": config.num_classes,
            "class_names": list(config.class_names),
        }
    if kind != "predict":
        return _error(msg.get("id", 0), f"unknown request type {kind!r}")

    request_id = msg.get("id")
    if not isinstance(request_id, int) or request_id < 0:
        return _error(request_id, "predict needs a non-negative integer id")
    if msg.get("format", "png") != "png":
        return _error(request_id, f"unsupported image format {msg.get('format')!r}")
    data = msg.get("data")
    if not isinstance(data, str):
        return _error(request_id, "predict needs base64 image bytes in 'data'")

    try:
        pixels = decode_image(data)
    except (binascii.Error, OSError, ValueError) as exc:
        return _error(request_id, f"cannot decode image: {exc}")

    try:
        values = [float(v) for v in config.model(pixels)]
    except Exception as exc:  # plugin failures must not kill the server
        return _error(request_id, f"model failed: {exc}")
    if len(values) != config.num_classes:
        return _error(
            request_id,
            f"model returned {len(values)} values, expected {config.num_classes}",
        )
    return {"type": "logits", "id": request_id, "values": values}
