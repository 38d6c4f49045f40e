"""Event-log parsing and sequence assembly.

The input format is delimiter-separated text with a header row. A
schema config maps the toolkit's column roles (user, timestamp, channel,
click, cost, conversion) onto the file's column names and lists which
extra columns become categorical features. Rows with conversion=1 are
conversion events: they close the user's current segment and are not
touch points themselves.
"""

from __future__ import annotations

import io
import json
import logging
import os
from dataclasses import dataclass, field

from ..errors import ConfigError
from .types import Sequence, TouchPoint

log = logging.getLogger(__name__)

# Field names under which channel and interaction time are folded into
# the categorical features. Time is bucketed to hour-of-day; raw epoch
# values would each be unique and useless as categories.
CHANNEL_FIELD = "channel"
TIME_FIELD = "timestamp"


def hour_bucket(timestamp: float) -> str:
    return f"h{int(timestamp // 3600) % 24:02d}"


@dataclass(frozen=True)
class SchemaConfig:
    """Column-role mapping for an event log."""

    user: str
    timestamp: str
    channel: str
    click: str
    conversion: str
    cost: str | None = None
    features: tuple[str, ...] = ()
    delimiter: str = "\t"

    @classmethod
    def from_file(cls, path) -> "SchemaConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {"user", "timestamp", "channel", "click", "conversion", "cost",
                 "features", "delimiter"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown schema keys: {sorted(unknown)}")
        try:
            return cls(
                user=raw["user"],
                timestamp=raw["timestamp"],
                channel=raw["channel"],
                click=raw["click"],
                conversion=raw["conversion"],
                cost=raw.get("cost"),
                features=tuple(raw.get("features", ())),
                delimiter=raw.get("delimiter", "\t"),
            )
        except KeyError as exc:
            raise ConfigError(f"schema is missing required key {exc}") from exc

    def required_columns(self) -> list[str]:
        cols = [self.user, self.timestamp, self.channel, self.click, self.conversion]
        if self.cost is not None:
            cols.append(self.cost)
        cols.extend(self.features)
        return cols


@dataclass
class ParseResult:
    """Records in input order plus the count of malformed rows skipped."""

    records: list[tuple[str, TouchPoint, int]] = field(default_factory=list)
    skipped: int = 0


def _open_lines(stream):
    if isinstance(stream, (str, os.PathLike)):
        return open(stream, encoding="utf-8"), True
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8")), True
    if hasattr(stream, "read") and isinstance(stream.read(0), bytes):
        return io.TextIOWrapper(stream, encoding="utf-8"), False
    return stream, False


def parse_events(stream, schema: SchemaConfig) -> ParseResult:
    """Parse an event log into (user_id, TouchPoint, conversion_flag) records.

    Malformed rows (wrong column count, unparsable numerics, out-of-range
    flags, negative cost) are counted, logged, and skipped. A schema that
    names a column absent from the header raises ConfigError.
    """
    fh, owned = _open_lines(stream)
    try:
        header_line = fh.readline()
        if not header_line:
            return ParseResult()
        header = header_line.rstrip("\r\n").split(schema.delimiter)
        col = {name: i for i, name in enumerate(header)}
        missing = [c for c in schema.required_columns() if c not in col]
        if missing:
            raise ConfigError(f"schema references missing columns {missing}; header has {header}")

        i_user = col[schema.user]
        i_ts = col[schema.timestamp]
        i_ch = col[schema.channel]
        i_click = col[schema.click]
        i_conv = col[schema.conversion]
        i_cost = col[schema.cost] if schema.cost is not None else None
        i_feats = [(name, col[name]) for name in schema.features]

        result = ParseResult()
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cells = line.split(schema.delimiter)
            if len(cells) != len(header):
                result.skipped += 1
                log.warning("line %d: expected %d columns, got %d", lineno, len(header), len(cells))
                continue
            try:
                user = cells[i_user]
                if not user:
                    raise ValueError("empty user id")
                ts = float(cells[i_ts])
                channel = cells[i_ch]
                click = int(cells[i_click])
                conv = int(cells[i_conv])
                if click not in (0, 1) or conv not in (0, 1):
                    raise ValueError("click/conversion flags must be 0 or 1")
                cost = float(cells[i_cost]) if i_cost is not None else 0.0
                if cost < 0:
                    raise ValueError("negative cost")
            except ValueError as exc:
                result.skipped += 1
                log.warning("line %d skipped: %s", lineno, exc)
                continue
            features = [(CHANNEL_FIELD, channel), (TIME_FIELD, hour_bucket(ts))]
            features.extend((name, cells[idx]) for name, idx in i_feats)
            point = TouchPoint(features=tuple(features), click=click,
                               channel=channel, timestamp=ts, cost=cost)
            result.records.append((user, point, conv))
        return result
    finally:
        if owned:
            fh.close()


def build_sequences(records) -> list[Sequence]:
    """Group records by user, order by time, and split at conversion events.

    A user's stream is cut immediately after each conversion event, so
    every output sequence carries at most one conversion. The conversion
    event contributes only the label and conversion time, never a touch
    point. Empty segments (a conversion with no preceding touches) are
    dropped. Users appear in first-seen order; timestamp ties keep input
    order.
    """
    by_user: dict[str, list[tuple[float, int, TouchPoint, int]]] = {}
    for order, (user, point, conv) in enumerate(records):
        by_user.setdefault(user, []).append((point.timestamp, order, point, conv))

    sequences: list[Sequence] = []
    for user, rows in by_user.items():
        rows.sort(key=lambda r: (r[0], r[1]))
        pending: list[TouchPoint] = []
        seq_index = 0
        for ts, _, point, conv in rows:
            if conv:
                if pending:
                    sequences.append(Sequence(user_id=user, points=tuple(pending),
                                              converted=1, conversion_time=ts,
                                              seq_index=seq_index))
                    seq_index += 1
                pending = []
            else:
                pending.append(point)
        if pending:
            sequences.append(Sequence(user_id=user, points=tuple(pending),
                                      converted=0, seq_index=seq_index))
    return sequences
