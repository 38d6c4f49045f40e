"""Back-evaluation: replay a historical event stream under a budget plan.

Events are walked in serving-time order. An event of a non-blacklisted
sequence is charged when its channel still has budget strictly greater
than the event cost; otherwise the whole sequence is blacklisted and its
conversion can never count. Charges are never refunded, so costs spent
on a sequence that is blacklisted later remain in the total.

The conversion of a converted sequence rides on its final touch event
(y=1); it is counted exactly when every event of the sequence up to and
including that one was charged.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ContractError
from ..seqdata import Sequence
from .budget import BudgetPlan


@dataclass(frozen=True)
class ReplayEvent:
    sequence_id: str
    timestamp: float
    channel: str
    cost: float
    converted: int  # 1 on a conversion-carrying serving event


@dataclass
class ReplayReport:
    conversions: int
    cost: float
    blacklist: frozenset[str]
    residual_budgets: dict[str, float]
    touched: int  # sequences charged at least once and never blacklisted
    charged_sequences: int

    @property
    def blacklist_size(self) -> int:
        return len(self.blacklist)


@dataclass
class ReplayMetrics:
    conversions: int
    cost: float
    cpa: float | None
    cvr: float | None
    profit: float
    gross_value: float


def events_from_sequences(sequences: list[Sequence]) -> list[ReplayEvent]:
    """Flatten sequences into a time-sorted serving-event stream.

    Every touch becomes a y=0 event except the last touch of a converted
    sequence, which carries y=1. Ties sort by (sequence id, position) so
    the stream is reproducible.
    """
    keyed = []
    for seq in sequences:
        last = len(seq) - 1
        for j, p in enumerate(seq.points):
            y = 1 if (seq.converted and j == last) else 0
            keyed.append((p.timestamp, seq.seq_id, j,
                          ReplayEvent(seq.seq_id, p.timestamp, p.channel, p.cost, y)))
    keyed.sort(key=lambda item: item[:3])
    return [item[3] for item in keyed]


def replay(events: list[ReplayEvent], plan: BudgetPlan | dict[str, float]) -> ReplayReport:
    """Run the back test; events must already be sorted by timestamp.

    Channels absent from the plan have zero budget, so their first event
    blacklists the sequence (a conservative lower bound on performance).
    """
    budgets = dict(plan.budgets) if isinstance(plan, BudgetPlan) else dict(plan)
    last_t = None
    blacklist: set[str] = set()
    charged: set[str] = set()
    conversions = 0
    cost = 0.0
    for event in events:
        if last_t is not None and event.timestamp < last_t:
            raise ContractError("replay events are not sorted by timestamp")
        last_t = event.timestamp
        if event.sequence_id in blacklist:
            continue
        remaining = budgets.get(event.channel, 0.0)
        if remaining > event.cost:
            cost += event.cost
            conversions += event.converted
            budgets[event.channel] = remaining - event.cost
            charged.add(event.sequence_id)
        else:
            blacklist.add(event.sequence_id)
    return ReplayReport(
        conversions=conversions,
        cost=cost,
        blacklist=frozenset(blacklist),
        residual_budgets=budgets,
        touched=len(charged - blacklist),
        charged_sequences=len(charged),
    )


def report_metrics(report: ReplayReport, conversion_value: float) -> ReplayMetrics:
    """Derive CPA / CVR / profit from a replay outcome.

    CPA is undefined (None) at zero conversions rather than infinite.
    CVR divides by the touched sequences: charged at least once, never
    blacklisted. Profit is conversion value earned minus money spent;
    the gross value is reported alongside.
    """
    y, o = report.conversions, report.cost
    gross = y * conversion_value
    return ReplayMetrics(
        conversions=y,
        cost=o,
        cpa=(o / y) if y > 0 else None,
        cvr=(y / report.touched) if report.touched > 0 else None,
        profit=gross - o,
        gross_value=gross,
    )


# ------------------------------------------------------------ event files

EVENTS_HEADER = ["sequence_id", "timestamp", "channel", "cost", "y"]


def write_events(path, events: list[ReplayEvent]):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(EVENTS_HEADER) + "\n")
        for e in events:
            fh.write(f"{e.sequence_id}\t{e.timestamp:.10g}\t{e.channel}\t"
                     f"{e.cost:.10g}\t{e.converted}\n")


def read_events(path) -> list[ReplayEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != EVENTS_HEADER:
            raise ContractError(f"{path}: expected header {EVENTS_HEADER}, got {header}")
        for line in fh:
            seq_id, ts, channel, cost, y = line.rstrip("\n").split("\t")
            events.append(ReplayEvent(seq_id, float(ts), channel, float(cost), int(y)))
    return events
