"""Independent oracles and synthetic data used to validate the engine.

The permutation oracle recomputes per-part values from the ordering
formulation with exact rational arithmetic, converted to float only at the
end, so engine-vs-oracle comparisons never have to argue about tolerance on
the oracle side. The synthetic dataset generator builds part-structured
drawings where each class is marked by a known discriminative part, plus
the matched analytic model, so class-level expectations are known a priori.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, factorial, sqrt
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import TooManyPlayers
from .image import RasterImage, save_png
from .manifest import DatasetManifest, ManifestRecord
from .masking import compute_fill_value
from .models import AdditiveToyModel
from .parts import PartAnnotation, PartSet
from .store import canonical_json

PART_NAME_POOL = ("hair", "eye", "nose", "mouth", "ear", "hand", "foot", "glasses")

_MAX_ORACLE_PLAYERS = 10

# synthetic rendering constants; fill_tolerance below absorbs the worst-case
# mean drift these bounds allow (see make_synthetic_dataset)
_BACKGROUND = 246
_COLOR_LO, _COLOR_HI = 28, 128
_FILL_TOLERANCE = 45
_PALETTE = (
    (64, 44, 44),
    (44, 84, 44),
    (44, 44, 104),
    (104, 64, 34),
    (34, 84, 84),
    (94, 34, 94),
    (40, 40, 40),
    (84, 84, 34),
)


def oracle_shapley_permutation(
    game: Mapping[int, float] | Callable[[int], float], k: int
) -> list[float]:
    """Per-part values via the ordering formulation, exact rationals throughout.

    `game` maps a coalition bit-set to a real payoff. Each part's total
    marginal over all k! orderings is accumulated as a Fraction and divided
    by k! before the single conversion to float.
    """
    if k > _MAX_ORACLE_PLAYERS:
        raise TooManyPlayers(f"oracle enumerates k! orderings; k={k} exceeds {_MAX_ORACLE_PLAYERS}")
    if k < 1:
        raise TooManyPlayers(f"need at least one player, got k={k}")
    lookup = game.__getitem__ if isinstance(game, Mapping) else game
    totals = [Fraction(0)] * k
    for ordering in itertools.permutations(range(k)):
        bits = 0
        prev = Fraction(lookup(0))
        for part in ordering:
            bits |= 1 << part
            cur = Fraction(lookup(bits))
            totals[part] += cur - prev
            prev = cur
    kf = factorial(k)
    return [float(t / kf) for t in totals]


def oracle_shapley_table(table: Mapping[int, Sequence[float]], k: int) -> np.ndarray:
    """Oracle applied per class column of a multi-class game table."""
    num_classes = len(next(iter(table.values())))
    out = np.empty((k, num_classes), dtype=np.float64)
    for c in range(num_classes):
        out[:, c] = oracle_shapley_permutation(
            {bits: float(v[c]) for bits, v in table.items()}, k
        )
    return out


def random_table_game(rng: np.random.Generator, k: int, num_classes: int) -> dict:
    """Arbitrary game: uniform values in [-10, 10] for every coalition."""
    return {bits: rng.uniform(-10.0, 10.0, size=num_classes) for bits in range(1 << k)}


def _grid_boxes(k: int, box_size: int, gap: int, margin: int) -> list[tuple[int, int, int, int]]:
    cols = ceil(sqrt(k))
    rows = ceil(k / cols)
    boxes = []
    for i in range(k):
        r, c = divmod(i, cols)
        x = margin + c * (box_size + gap)
        y = margin + r * (box_size + gap)
        boxes.append((x, y, x + box_size, y + box_size))
    del rows
    return boxes


def make_part_grid_image(
    k: int,
    *,
    names: Sequence[str] | None = None,
    box_size: int = 4,
    gap: int = 4,
    margin: int = 4,
    channels: int = 1,
) -> tuple[RasterImage, PartSet, tuple[int, ...]]:
    """A minimal part-structured image: solid black boxes on a light field.

    Returns (image, parts, fill) with fill precomputed so toy models built on
    top decode coalitions bit-exactly. Sized just big enough for the grid.
    """
    if names is None:
        names = [f"p{i}" for i in range(k)]
    boxes = _grid_boxes(k, box_size, gap, margin)
    width = max(b[2] for b in boxes) + margin
    height = max(b[3] for b in boxes) + margin
    arr = np.full((height, width, channels), 250, dtype=np.uint8)
    for x0, y0, x1, y1 in boxes:
        arr[y0:y1, x0:x1, :] = 0
    image = RasterImage(arr)
    parts = PartSet(tuple(PartAnnotation(n, b) for n, b in zip(names, boxes)))
    return image, parts, compute_fill_value(image)


@dataclass
class SyntheticDataset:
    root: Path
    manifest_path: Path
    manifest: DatasetManifest
    model: AdditiveToyModel
    model_config_path: Path
    markers: tuple[str, ...]  # discriminative part name per class
    part_boxes: dict


def make_synthetic_dataset(
    seed: int,
    k: int,
    num_classes: int,
    n_per_class: int,
    out_dir: str | Path,
    *,
    image_size: tuple[int, int] = (64, 64),
    box_size: int = 10,
    markers: Sequence[str] | None = None,
    overlapping: bool = False,
) -> SyntheticDataset:
    """Generate a dataset with a known discriminative part per class.

    All samples share one part geometry (the matched model needs fixed
    boxes); per-sample variety comes from seeded color jitter. Each class
    draws the common parts plus its own marker part and annotates exactly
    what it draws, so other classes' markers are genuinely absent, the
    matched additive model predicts every sample correctly, and the expected
    class-level histogram is one-hot on the marker.
    """
    if not 1 <= k <= 8:
        raise ValueError(f"synthetic generator supports 1..8 parts, got {k}")
    if num_classes > k:
        raise ValueError(f"need one marker part per class: k={k} < classes={num_classes}")
    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)

    vocab = PART_NAME_POOL[:k]
    if markers is None:
        markers = vocab[k - num_classes :]
    markers = tuple(markers)
    if len(markers) != num_classes or len(set(markers)) != num_classes:
        raise ValueError(f"need {num_classes} distinct marker parts, got {markers}")
    if any(m not in vocab for m in markers):
        raise ValueError(f"markers {markers} must come from the vocabulary {vocab}")
    commons = tuple(n for n in vocab if n not in markers)
    class_names = tuple(f"class_{m}" for m in markers)

    width, height = image_size
    gap = 4 if overlapping else 8
    margin = 6
    boxes = _grid_boxes(k, box_size, gap, margin)
    if overlapping:
        # shift every other box onto its left neighbour to exercise overlap rules
        boxes = [
            (max(0, x0 - box_size // 2), y0, x1 - box_size // 2, y1) if i % 2 else (x0, y0, x1, y1)
            for i, (x0, y0, x1, y1) in enumerate(boxes)
        ]
    if max(b[2] for b in boxes) > width or max(b[3] for b in boxes) > height:
        raise ValueError(f"{k} boxes of size {box_size} do not fit in {image_size}")
    # decode-safety bound: masking may shift the per-image mean by at most
    # masked_fraction * (background - darkest color); keep it under tolerance
    per_sample_parts = len(commons) + 1
    drift = per_sample_parts * box_size**2 / (width * height) * (_BACKGROUND - _COLOR_LO)
    if drift >= _FILL_TOLERANCE:
        raise ValueError(
            f"part area too large for reliable decoding (drift bound {drift:.1f})"
        )
    box_of = dict(zip(vocab, boxes))

    records = []
    for c, class_name in enumerate(class_names):
        sample_parts = tuple(sorted((*commons, markers[c]), key=vocab.index))
        for i in range(n_per_class):
            arr = np.full((height, width, 3), _BACKGROUND, dtype=np.uint8)
            for name in sample_parts:
                base = _PALETTE[vocab.index(name)]
                jitter = rng.integers(-12, 13, size=3)
                color = np.clip(np.array(base) + jitter, _COLOR_LO, _COLOR_HI)
                x0, y0, x1, y1 = box_of[name]
                arr[y0:y1, x0:x1, :] = color.astype(np.uint8)
            sample_id = f"{class_name}_{i:03d}"
            rel = f"images/{sample_id}.png"
            save_png(RasterImage(arr), out_dir / rel)
            records.append(
                ManifestRecord(
                    sample_id=sample_id,
                    image_path=rel,
                    label=class_name,
                    parts=tuple(
                        PartAnnotation(name, box_of[name]) for name in sample_parts
                    ),
                )
            )

    manifest = DatasetManifest(
        classes=class_names,
        part_vocabulary=vocab,
        records=tuple(records),
        root=out_dir,
    )
    manifest_path = out_dir / "manifest.jsonl"
    manifest.dump(manifest_path)

    weights = np.zeros((k, num_classes))
    for c, m in enumerate(markers):
        weights[vocab.index(m), c] = 8.0
    model_parts = PartSet(tuple(PartAnnotation(n, box_of[n]) for n in vocab))
    model = AdditiveToyModel(
        model_parts,
        weights,
        np.zeros(num_classes),
        class_names=class_names,
        fill_tolerance=_FILL_TOLERANCE,
    )
    model_config_path = out_dir / "model.json"
    model_config_path.write_text(
        canonical_json(
            {
                "type": "additive",
                "class_names": list(class_names),
                "parts": [{"name": n, "box": list(box_of[n])} for n in vocab],
                "weights": weights,
                "bias": np.zeros(num_classes),
                "presence_threshold": 0.9,
                "fill_tolerance": _FILL_TOLERANCE,
            }
        )
    )
    return SyntheticDataset(
        root=out_dir,
        manifest_path=manifest_path,
        manifest=manifest,
        model=model,
        model_config_path=model_config_path,
        markers=markers,
        part_boxes=box_of,
    )


def jitter_annotations(
    manifest: DatasetManifest, max_px: int, seed: int
) -> DatasetManifest:
    """Clone a manifest with every box shifted by up to +/- max_px per axis."""
    rng = np.random.default_rng(seed)
    records = []
    for rec in manifest.records:
        parts = []
        for p in rec.parts:
            dx, dy = (int(v) for v in rng.integers(-max_px, max_px + 1, size=2))
            x0, y0, x1, y1 = p.box
            x0, x1 = max(0, x0 + dx), x1 + dx
            y0, y1 = max(0, y0 + dy), y1 + dy
            parts.append(PartAnnotation(p.name, (x0, y0, x1, y1)))
        records.append(
            ManifestRecord(rec.sample_id, rec.image_path, rec.label, tuple(parts))
        )
    return DatasetManifest(
        classes=manifest.classes,
        part_vocabulary=manifest.part_vocabulary,
        records=tuple(records),
        root=manifest.root,
    )
