"""Dataset manifests: newline-delimited JSON, one header plus one record per sample.

Header: {"classes": [...], "part_vocabulary": [...]}
Record: {"id": ..., "image": relative path, "label": class name,
         "parts": [{"name": ..., "box": [x_min, y_min, x_max, y_max]}, ...]}

A record may omit vocabulary parts (a drawing can lack an ear); its parts
are stored in vocabulary order so bit indices are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError, SampleNotFound
from .image import RasterImage, load_image
from .parts import PartAnnotation, PartSet


@dataclass(frozen=True)
class ManifestRecord:
    sample_id: str
    image_path: str
    label: str
    parts: tuple[PartAnnotation, ...]


@dataclass(frozen=True)
class LabeledSample:
    """A record with its image loaded and parts assembled for explanation."""

    sample_id: str
    image: RasterImage
    parts: PartSet
    label_index: int
    vocab_indices: tuple[int, ...]  # vocabulary index of each local part


@dataclass
class DatasetManifest:
    classes: tuple[str, ...]
    part_vocabulary: tuple[str, ...]
    records: tuple[ManifestRecord, ...]
    root: Path

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        try:
            lines = path.read_text().splitlines()
        except OSError as exc:
            raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
        entries = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
        if not entries:
            raise ManifestError(f"{path}: empty manifest")

        lineno, header_line = entries[0]
        header = _parse_json(path, lineno, header_line)
        classes = _string_list(path, lineno, header, "classes")
        vocab = _string_list(path, lineno, header, "part_vocabulary")
        if len(set(classes)) != len(classes):
            raise ManifestError(f"{path}:{lineno}: duplicate class names")
        if len(set(vocab)) != len(vocab):
            raise ManifestError(f"{path}:{lineno}: duplicate vocabulary parts")

        vocab_order = {name: i for i, name in enumerate(vocab)}
        records = []
        seen_ids = set()
        for lineno, line in entries[1:]:
            obj = _parse_json(path, lineno, line)
            rec = _parse_record(path, lineno, obj, classes, vocab_order)
            if rec.sample_id in seen_ids:
                raise ManifestError(f"{path}:{lineno}: duplicate sample id {rec.sample_id!r}")
            seen_ids.add(rec.sample_id)
            records.append(rec)

        return cls(
            classes=tuple(classes),
            part_vocabulary=tuple(vocab),
            records=tuple(records),
            root=path.parent,
        )

    def dump(self, path: str | Path) -> None:
        lines = [
            _canon({"classes": list(self.classes), "part_vocabulary": list(self.part_vocabulary)})
        ]
        for rec in self.records:
            lines.append(
                _canon(
                    {
                        "id": rec.sample_id,
                        "image": rec.image_path,
                        "label": rec.label,
                        "parts": [
                            {"name": p.name, "box": list(p.box)} for p in rec.parts
                        ],
                    }
                )
            )
        Path(path).write_text("\n".join(lines) + "\n")

    def label_index(self, label: str) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise ManifestError(f"unknown class {label!r}") from None

    def record(self, sample_id: str) -> ManifestRecord:
        for rec in self.records:
            if rec.sample_id == sample_id:
                return rec
        raise SampleNotFound(f"no sample with id {sample_id!r}")

    def load_sample(self, rec: ManifestRecord) -> LabeledSample:
        image = load_image(self.root / rec.image_path)
        parts = PartSet(rec.parts)
        vocab_indices = tuple(self.part_vocabulary.index(p.name) for p in rec.parts)
        return LabeledSample(
            sample_id=rec.sample_id,
            image=image,
            parts=parts,
            label_index=self.label_index(rec.label),
            vocab_indices=vocab_indices,
        )

    def samples(self):
        for rec in self.records:
            yield self.load_sample(rec)


def _canon(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _parse_json(path: Path, lineno: int, line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ManifestError(f"{path}:{lineno}: expected a JSON object")
    return obj


def _string_list(path: Path, lineno: int, obj: dict, key: str) -> list[str]:
    value = obj.get(key)
    if (
        not isinstance(value, list)
        or not value
        or not all(isinstance(v, str) and v for v in value)
    ):
        raise ManifestError(f"{path}:{lineno}: {key!r} must be a non-empty list of names")
    return value


def _parse_record(
    path: Path, lineno: int, obj: dict, classes: list[str], vocab_order: dict[str, int]
) -> ManifestRecord:
    for key in ("id", "image", "label", "parts"):
        if key not in obj:
            raise ManifestError(f"{path}:{lineno}: record missing {key!r}")
    if obj["label"] not in classes:
        raise ManifestError(
            f"{path}:{lineno}: label {obj['label']!r} not in classes {classes}"
        )
    raw_parts = obj["parts"]
    if not isinstance(raw_parts, list) or not raw_parts:
        raise ManifestError(f"{path}:{lineno}: record needs at least one part")
    annotations = []
    for p in raw_parts:
        if not isinstance(p, dict) or "name" not in p or "box" not in p:
            raise ManifestError(f"{path}:{lineno}: each part needs 'name' and 'box'")
        name, box = p["name"], p["box"]
        if name not in vocab_order:
            raise ManifestError(
                f"{path}:{lineno}: part {name!r} not in the vocabulary"
            )
        if not isinstance(box, list) or len(box) != 4:
            raise ManifestError(f"{path}:{lineno}: part {name!r}: box must be 4 ints")
        try:
            annotations.append(PartAnnotation(name, tuple(int(v) for v in box)))
        except Exception as exc:
            raise ManifestError(f"{path}:{lineno}: {exc}") from exc
    names = [a.name for a in annotations]
    if len(set(names)) != len(names):
        raise ManifestError(f"{path}:{lineno}: duplicate part names in record")
    annotations.sort(key=lambda a: vocab_order[a.name])
    return ManifestRecord(
        sample_id=str(obj["id"]),
        image_path=str(obj["image"]),
        label=str(obj["label"]),
        parts=tuple(annotations),
    )
