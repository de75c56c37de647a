"""Value functions: the black-box mapping from image to logit vector.

Two analytic toy models ship with the package. The additive model is a game
whose exact per-part values are its own weight rows, which grounds the
axiom tests; the table model realizes an arbitrary game for brute-force
comparisons. Both recover which parts an image contains from pixels alone,
via the fill-value heuristic: a part counts as present when at least
`presence_threshold` of its box pixels differ from the inpainting fill by
more than `fill_tolerance` on some channel.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import NonFiniteLogit, PartShapError
from .image import RasterImage
from .masking import compute_fill_value
from .parts import PartSet


def check_logits(values, num_classes: int) -> np.ndarray:
    """Validate and normalize one logit vector to float64, length C."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (num_classes,):
        raise PartShapError(
            f"expected logit vector of length {num_classes}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise NonFiniteLogit(f"non-finite logits: {arr.tolist()}")
    return arr


class ValueFunction:
    """Deterministic image -> logit-vector mapping over a fixed class list."""

    def __init__(self, num_classes: int, class_names: Sequence[str] | None = None):
        if num_classes < 2:
            raise PartShapError(f"need at least 2 classes, got {num_classes}")
        self.num_classes = int(num_classes)
        if class_names is None:
            class_names = tuple(f"class{i}" for i in range(num_classes))
        if len(class_names) != num_classes:
            raise PartShapError(
                f"{len(class_names)} class names for {num_classes} classes"
            )
        self.class_names = tuple(class_names)

    def evaluate(self, image: RasterImage) -> np.ndarray:
        raise NotImplementedError

    def evaluate_batch(self, images: Sequence[RasterImage]) -> np.ndarray:
        """Element-wise evaluate, order preserved; first failure names its index."""
        if len(images) == 0:
            raise PartShapError("evaluate_batch needs a non-empty sequence")
        out = np.empty((len(images), self.num_classes), dtype=np.float64)
        for i, img in enumerate(images):
            try:
                out[i] = self.evaluate(img)
            except PartShapError as exc:
                raise type(exc)(f"batch index {i}: {exc}") from exc
        return out


def decode_present_parts(
    image: RasterImage,
    parts: PartSet,
    *,
    fill_value: tuple[int, ...] | None = None,
    presence_threshold: float = 0.9,
    fill_tolerance: int = 0,
) -> int:
    """Recover the coalition bit-set an image encodes.

    When `fill_value` is None, the fill is recomputed from the image being
    decoded; a nonzero `fill_tolerance` absorbs the mean drift that masking
    introduces between a variant and its original.
    """
    if fill_value is None:
        fill_value = compute_fill_value(image)
    fill = np.asarray(fill_value, dtype=np.int16)
    pixels = image.pixels.astype(np.int16)
    bits = 0
    for k, part in enumerate(parts):
        x_min, y_min, x_max, y_max = part.box
        region = pixels[y_min:y_max, x_min:x_max, :]
        differs = np.any(np.abs(region - fill) > fill_tolerance, axis=2)
        if differs.mean() >= presence_threshold:
            bits |= 1 << k
    return bits


class AdditiveToyModel(ValueFunction):
    """Analytic game: logit[c] = bias[c] + sum of weights[k][c] over present parts.

    Each part's marginal contribution is the constant weights[k], so the
    exact per-part value for every class is the weight matrix itself.
    """

    def __init__(
        self,
        parts: PartSet,
        weights,
        bias,
        *,
        class_names: Sequence[str] | None = None,
        presence_threshold: float = 0.9,
        fill_value: tuple[int, ...] | None = None,
        fill_tolerance: int = 0,
    ):
        self.part_set = parts
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[0] != parts.k:
            raise PartShapError(
                f"weights must be (K, C) = ({parts.k}, C), got {self.weights.shape}"
            )
        super().__init__(self.weights.shape[1], class_names)
        self.bias = check_logits(bias, self.num_classes)
        self.presence_threshold = presence_threshold
        self.fill_value = fill_value
        self.fill_tolerance = fill_tolerance

    def present_bits(self, image: RasterImage) -> int:
        return decode_present_parts(
            image,
            self.part_set,
            fill_value=self.fill_value,
            presence_threshold=self.presence_threshold,
            fill_tolerance=self.fill_tolerance,
        )

    def logits_for_bits(self, bits: int) -> np.ndarray:
        mask = np.array(
            [bool(bits >> k & 1) for k in range(self.part_set.k)], dtype=bool
        )
        return self.bias + self.weights[mask].sum(axis=0)

    def evaluate(self, image: RasterImage) -> np.ndarray:
        return self.logits_for_bits(self.present_bits(image))


class TableToyModel(ValueFunction):
    """Arbitrary game given by an explicit coalition -> logits table."""

    def __init__(
        self,
        parts: PartSet,
        table: Mapping[int, Sequence[float]],
        *,
        class_names: Sequence[str] | None = None,
        presence_threshold: float = 0.9,
        fill_value: tuple[int, ...] | None = None,
        fill_tolerance: int = 0,
    ):
        self.part_set = parts
        expected = set(range(1 << parts.k))
        if set(table) != expected:
            missing = sorted(expected - set(table))[:4]
            raise PartShapError(
                f"table must cover all {1 << parts.k} coalitions; missing {missing}..."
            )
        first = np.asarray(next(iter(table.values())), dtype=np.float64)
        super().__init__(first.shape[0], class_names)
        self.table = {
            bits: check_logits(v, self.num_classes) for bits, v in table.items()
        }
        self.presence_threshold = presence_threshold
        self.fill_value = fill_value
        self.fill_tolerance = fill_tolerance

    def present_bits(self, image: RasterImage) -> int:
        return decode_present_parts(
            image,
            self.part_set,
            fill_value=self.fill_value,
            presence_threshold=self.presence_threshold,
            fill_tolerance=self.fill_tolerance,
        )

    def evaluate(self, image: RasterImage) -> np.ndarray:
        return self.table[self.present_bits(image)]


class CallableValueFunction(ValueFunction):
    """Wrap any pixels -> logits callable as a value function."""

    def __init__(
        self,
        fn: Callable[[np.ndarray], Sequence[float]],
        num_classes: int,
        class_names: Sequence[str] | None = None,
    ):
        super().__init__(num_classes, class_names)
        self._fn = fn

    def evaluate(self, image: RasterImage) -> np.ndarray:
        return check_logits(self._fn(image.pixels), self.num_classes)


class CountingValueFunction(ValueFunction):
    """Delegating wrapper that counts individual image evaluations."""

    def __init__(self, inner: ValueFunction):
        super().__init__(inner.num_classes, inner.class_names)
        self.inner = inner
        self.calls = 0

    def evaluate(self, image: RasterImage) -> np.ndarray:
        self.calls += 1
        return self.inner.evaluate(image)


def evaluate(vf: ValueFunction, image: RasterImage) -> np.ndarray:
    return check_logits(vf.evaluate(image), vf.num_classes)


def evaluate_batch(vf: ValueFunction, images: Sequence[RasterImage]) -> np.ndarray:
    return vf.evaluate_batch(images)


def _config_parts(cfg: dict) -> PartSet:
    from .parts import PartAnnotation

    return PartSet(
        tuple(PartAnnotation(p["name"], tuple(p["box"])) for p in cfg["parts"])
    )


def _decode_options(cfg: dict) -> dict:
    opts = {
        "presence_threshold": cfg.get("presence_threshold", 0.9),
        "fill_tolerance": cfg.get("fill_tolerance", 0),
    }
    if cfg.get("fill_value") is not None:
        opts["fill_value"] = tuple(cfg["fill_value"])
    return opts


def additive_from_config(path) -> AdditiveToyModel:
    """Load an additive toy model from its JSON config file."""
    import json
    from pathlib import Path

    cfg = json.loads(Path(path).read_text())
    return AdditiveToyModel(
        _config_parts(cfg),
        cfg["weights"],
        cfg["bias"],
        class_names=cfg.get("class_names"),
        **_decode_options(cfg),
    )


def table_from_config(path) -> TableToyModel:
    """Load a table toy model; table keys are coalition bitstrings like "101"."""
    import json
    from pathlib import Path

    cfg = json.loads(Path(path).read_text())
    table = {int(key, 2): values for key, values in cfg["table"].items()}
    return TableToyModel(
        _config_parts(cfg),
        table,
        class_names=cfg.get("class_names"),
        **_decode_options(cfg),
    )
