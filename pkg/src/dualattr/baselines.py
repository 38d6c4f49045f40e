"""Reference attribution models over the same sequence data.

SP: a channel's empirical conversion probability feeds a noisy-or
predictor; per-touch credit is proportional to the touch channel's
probability (the predictor itself defines no touch-level split, so the
proportional rule is this artifact's choice, as is LR's).

LR: logistic regression on per-sequence channel occurrence counts; a
channel's learned coefficient is its credit, clamped at zero so credits
stay non-negative.

Rules: first- and last-touch assign all credit to one touch point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .seqdata import Sequence


# --------------------------------------------------------------------- SP

@dataclass
class ChannelStats:
    """Per-channel empirical conversion probability with its counts.

    ``probability`` returns 0.0 for channels never seen in training,
    which makes them no-ops in the noisy-or product.
    """

    probs: dict[str, float] = field(default_factory=dict)
    exposures: dict[str, int] = field(default_factory=dict)
    conversions: dict[str, int] = field(default_factory=dict)

    def probability(self, channel: str) -> float:
        return self.probs.get(channel, 0.0)

    def seen(self, channel: str) -> bool:
        return channel in self.probs


def sp_fit(train_sequences: list[Sequence]) -> ChannelStats:
    """P(converted | channel touched) from sequence-level counts."""
    stats = ChannelStats()
    for seq in train_sequences:
        for channel in {p.channel for p in seq.points}:
            stats.exposures[channel] = stats.exposures.get(channel, 0) + 1
            if seq.converted:
                stats.conversions[channel] = stats.conversions.get(channel, 0) + 1
    for channel, n in stats.exposures.items():
        stats.probs[channel] = stats.conversions.get(channel, 0) / n
    return stats


def sp_predict(seq: Sequence, stats: ChannelStats) -> float:
    """Noisy-or over the sequence's touches: 1 - prod(1 - P(y|channel))."""
    miss = 1.0
    for p in seq.points:
        miss *= 1.0 - stats.probability(p.channel)
    return 1.0 - miss


def sp_attribute(seq: Sequence, stats: ChannelStats) -> np.ndarray:
    """Credits proportional to each touch channel's conversion probability;
    uniform when every probability is zero."""
    weights = np.array([stats.probability(p.channel) for p in seq.points])
    total = weights.sum()
    if total <= 0.0:
        return np.full(len(seq), 1.0 / len(seq))
    return weights / total


# --------------------------------------------------------------------- LR

@dataclass
class LrModel:
    weights: np.ndarray
    bias: float
    channel_index: dict[str, int]

    def weight_of(self, channel: str) -> float:
        i = self.channel_index.get(channel)
        return float(self.weights[i]) if i is not None else 0.0


def _channel_counts(seq: Sequence, channel_index: dict[str, int]) -> np.ndarray:
    x = np.zeros(len(channel_index))
    for p in seq.points:
        i = channel_index.get(p.channel)
        if i is not None:
            x[i] += 1.0
    return x


def lr_fit(train_sequences: list[Sequence], l2: float = 1e-4, epochs: int = 400,
           lr: float = 0.5, seed: int = 0) -> LrModel:
    """Full-batch gradient descent on mean cross-entropy with L2 on the
    weights (bias unpenalized). Zero init makes the fit deterministic
    regardless of seed; the argument is kept for interface stability."""
    del seed
    channels = sorted({p.channel for s in train_sequences for p in s.points})
    channel_index = {c: i for i, c in enumerate(channels)}
    X = np.stack([_channel_counts(s, channel_index) for s in train_sequences])
    y = np.array([float(s.converted) for s in train_sequences])
    n = len(train_sequences)
    w = np.zeros(len(channels))
    b = 0.0
    for _ in range(epochs):
        z = X @ w + b
        p = np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))
        err = p - y
        w -= lr * (X.T @ err / n + l2 * w)
        b -= lr * err.mean()
        if not (np.isfinite(w).all() and np.isfinite(b)):
            raise NumericalError("logistic regression diverged; lower lr or raise l2")
    return LrModel(weights=w, bias=b, channel_index=channel_index)


def lr_predict(seq: Sequence, model: LrModel) -> float:
    z = _channel_counts(seq, model.channel_index) @ model.weights + model.bias
    return float(1.0 / (1.0 + np.exp(-z))) if z >= 0 else float(np.exp(z) / (1.0 + np.exp(z)))


def lr_attribute(seq: Sequence, model: LrModel) -> np.ndarray:
    """Credits proportional to the touch channel's coefficient, clamped at
    zero; uniform when every clamped coefficient is zero."""
    weights = np.array([max(model.weight_of(p.channel), 0.0) for p in seq.points])
    total = weights.sum()
    if total <= 0.0:
        return np.full(len(seq), 1.0 / len(seq))
    return weights / total


# ------------------------------------------------------------------ rules

RULE_FIRST = "first"
RULE_LAST = "last"


def rule_attribute(seq: Sequence, rule: str) -> np.ndarray:
    """Full credit on the first or last touch point."""
    if rule not in (RULE_FIRST, RULE_LAST):
        raise ConfigError(f"rule must be 'first' or 'last', got {rule!r}")
    credits = np.zeros(len(seq))
    credits[0 if rule == RULE_FIRST else -1] = 1.0
    return credits
