"""Deterministic result persistence.

Everything is written as canonical JSON: sorted keys, fixed separators,
floats in Python's shortest round-trip form. Re-running with identical
config and inputs therefore reproduces byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and NaN to JSON-safe values."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and obj != obj:  # NaN -> null
        return None
    return obj


def canonical_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


class ResultStore:
    """A run directory holding the config snapshot and all outputs."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, *relative: str) -> Path:
        p = self.root.joinpath(*relative)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def write_json(self, relative: str, obj) -> Path:
        p = self.path(relative)
        p.write_text(canonical_json(obj))
        return p

    def write_text(self, relative: str, text: str) -> Path:
        p = self.path(relative)
        p.write_text(text)
        return p

    def write_config(self, config: dict) -> Path:
        return self.write_json("config.json", config)

    def read_json(self, relative: str):
        return json.loads((self.root / relative).read_text())
