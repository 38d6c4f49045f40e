"""Sequence-level preprocessing: length/duration filtering, negative
sampling of non-converted sequences, and the train/test split."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .types import Sequence

SECONDS_PER_DAY = 86400.0

# Preprocessing defaults: sequences of 3..20 touch points spanning at
# most 14 days, and non-converted sequences downsampled to 20x the
# converted count.
DEFAULT_MIN_LEN = 3
DEFAULT_MAX_LEN = 20
DEFAULT_MAX_DURATION_DAYS = 14.0
DEFAULT_NEGATIVE_RATIO = 20.0


def filter_sequences(sequences, min_len: int = DEFAULT_MIN_LEN,
                     max_len: int = DEFAULT_MAX_LEN,
                     max_duration_days: float = DEFAULT_MAX_DURATION_DAYS) -> list[Sequence]:
    """Keep sequences with min_len <= length <= max_len whose first-to-last
    touch span is within max_duration_days. Order is preserved; the
    operation is idempotent."""
    if min_len > max_len:
        raise ConfigError(f"min_len {min_len} exceeds max_len {max_len}")
    max_span = max_duration_days * SECONDS_PER_DAY
    return [s for s in sequences
            if min_len <= len(s) <= max_len and s.duration <= max_span]


def negative_sample(sequences, ratio: float = DEFAULT_NEGATIVE_RATIO,
                    rng_seed: int = 0) -> list[Sequence]:
    """Retain all converted sequences; uniformly subsample the rest.

    Non-converted sequences are sampled without replacement down to
    ratio * (#converted); when fewer exist they are all kept. The output
    preserves the input's relative order and is deterministic for a
    fixed seed.
    """
    if ratio <= 0:
        raise ConfigError(f"sampling ratio must be positive, got {ratio}")
    converted_idx = [i for i, s in enumerate(sequences) if s.converted]
    negative_idx = [i for i, s in enumerate(sequences) if not s.converted]
    target = int(ratio * len(converted_idx))
    if len(negative_idx) > target:
        rng = np.random.default_rng(rng_seed)
        chosen = rng.choice(len(negative_idx), size=target, replace=False)
        negative_idx = [negative_idx[i] for i in sorted(chosen)]
    keep = sorted(converted_idx + negative_idx)
    return [sequences[i] for i in keep]


def train_test_split(sequences, test_fraction: float, rng_seed: int = 0):
    """Disjoint, seed-deterministic partition into (train, test) by sequence."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(sequences)
    n_test = int(round(n * test_fraction))
    rng = np.random.default_rng(rng_seed)
    order = rng.permutation(n)
    test_idx = set(order[:n_test].tolist())
    train = [s for i, s in enumerate(sequences) if i not in test_idx]
    test = [s for i, s in enumerate(sequences) if i in test_idx]
    return train, test
