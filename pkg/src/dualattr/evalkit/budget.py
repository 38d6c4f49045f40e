"""Channel-level credit aggregation, ROI, and proportional budget split.

A channel's ROI is its attributed conversion value divided by the money
historically spent on it; budgets are then allocated proportionally to
ROI. Only converted sequences carry credit into the aggregation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ContractError

log = logging.getLogger(__name__)


def channel_credit(attributions, sequences) -> dict[str, float]:
    """Sum per-touch credits by channel over the converted sequences.

    ``attributions`` holds one credit vector per sequence (any indexable
    of per-touch floats), aligned with ``sequences``.
    """
    if len(attributions) != len(sequences):
        raise ContractError(
            f"{len(attributions)} attribution vectors for {len(sequences)} sequences")
    credit: dict[str, float] = {}
    for credits, seq in zip(attributions, sequences):
        values = np.asarray(credits, dtype=np.float64)
        if values.shape != (len(seq),):
            raise ContractError(
                f"sequence {seq.seq_id}: {values.shape} credits for {len(seq)} touch points")
        if not seq.converted:
            continue
        for point, c in zip(seq.points, values):
            credit[point.channel] = credit.get(point.channel, 0.0) + float(c)
    return credit


@dataclass
class ChannelRoi:
    credit: dict[str, float]
    spend: dict[str, float]
    roi: dict[str, float]
    excluded: list[str] = field(default_factory=list)


def compute_roi(credit: dict[str, float], spend: dict[str, float],
                conversion_value: float) -> ChannelRoi:
    """ROI per channel: credit * value-per-conversion / historical spend.

    Channels without positive spend cannot have a defined ROI; they are
    excluded from allocation and logged.
    """
    if conversion_value <= 0:
        raise ConfigError(f"conversion value must be positive, got {conversion_value}")
    roi: dict[str, float] = {}
    excluded: list[str] = []
    for channel in sorted(credit):
        money = spend.get(channel, 0.0)
        if money > 0.0:
            roi[channel] = credit[channel] * conversion_value / money
        else:
            excluded.append(channel)
    if excluded:
        log.warning("channels without spend excluded from ROI: %s", excluded)
    return ChannelRoi(credit=dict(credit), spend=dict(spend), roi=roi, excluded=excluded)


@dataclass
class BudgetPlan:
    """Per-channel budgets summing to the total."""

    total: float
    budgets: dict[str, float]

    def __post_init__(self):
        if any(b < 0 for b in self.budgets.values()):
            raise ContractError("channel budgets must be non-negative")
        if self.budgets and abs(sum(self.budgets.values()) - self.total) > 1e-6:
            raise ContractError(
                f"budgets sum to {sum(self.budgets.values())}, expected {self.total}")

    def budget_for(self, channel: str) -> float:
        return self.budgets.get(channel, 0.0)


def allocate_budget(roi: ChannelRoi | dict[str, float], total: float) -> BudgetPlan:
    """Split the total proportionally to channel ROI.

    With every ROI at zero the split falls back to uniform (warned),
    keeping the plan well-defined.
    """
    if total <= 0:
        raise ConfigError(f"total budget must be positive, got {total}")
    ratios = roi.roi if isinstance(roi, ChannelRoi) else dict(roi)
    if not ratios:
        raise ConfigError("no channels with defined ROI to allocate over")
    mass = sum(ratios.values())
    if mass <= 0.0:
        log.warning("all ROI values are zero; allocating uniformly")
        share = total / len(ratios)
        return BudgetPlan(total=total, budgets={c: share for c in sorted(ratios)})
    return BudgetPlan(total=total,
                      budgets={c: total * r / mass for c, r in sorted(ratios.items())})
