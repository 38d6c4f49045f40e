"""Evaluation: metrics, channel ROI, budget allocation, and log replay."""

from .budget import BudgetPlan, ChannelRoi, allocate_budget, channel_credit, compute_roi
from .metrics import auc, logloss
from .replay import (
    EVENTS_HEADER,
    ReplayEvent,
    ReplayMetrics,
    ReplayReport,
    events_from_sequences,
    read_events,
    replay,
    report_metrics,
    write_events,
)

__all__ = [
    "BudgetPlan",
    "ChannelRoi",
    "EVENTS_HEADER",
    "ReplayEvent",
    "ReplayMetrics",
    "ReplayReport",
    "allocate_budget",
    "auc",
    "channel_credit",
    "compute_roi",
    "events_from_sequences",
    "logloss",
    "read_events",
    "replay",
    "report_metrics",
    "write_events",
]
