"""Exact round-trip persistence for named tensors (npz container)."""

from __future__ import annotations

import numpy as np

from ..errors import CheckpointError
from .tensor import Tensor


def save_tensors(path, named: dict):
    arrays = {}
    for name, t in named.items():
        arrays[name] = t.values if isinstance(t, Tensor) else np.asarray(t, dtype=np.float64)
    np.savez(path, **arrays)


def load_tensors(path) -> dict[str, np.ndarray]:
    try:
        with np.load(path) as data:
            return {name: data[name] for name in data.files}
    except FileNotFoundError:
        raise
    except Exception as exc:  # zipfile/format errors
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
