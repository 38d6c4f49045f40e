"""Sequence persistence as JSON lines, stable across reruns."""

from __future__ import annotations

import json

from .types import Sequence, TouchPoint


def _point_dict(p: TouchPoint) -> dict:
    return {
        "features": [[f, v] for f, v in p.features],
        "click": p.click,
        "channel": p.channel,
        "timestamp": p.timestamp,
        "cost": p.cost,
    }


def sequence_to_json(seq: Sequence) -> str:
    doc = {
        "user_id": seq.user_id,
        "seq_index": seq.seq_index,
        "converted": seq.converted,
        "conversion_time": seq.conversion_time,
        "points": [_point_dict(p) for p in seq.points],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def sequence_from_json(line: str) -> Sequence:
    doc = json.loads(line)
    points = tuple(
        TouchPoint(
            features=tuple((f, v) for f, v in p["features"]),
            click=p["click"],
            channel=p["channel"],
            timestamp=p["timestamp"],
            cost=p["cost"],
        )
        for p in doc["points"]
    )
    return Sequence(
        user_id=doc["user_id"],
        points=points,
        converted=doc["converted"],
        conversion_time=doc["conversion_time"],
        seq_index=doc["seq_index"],
    )


def write_sequences(path, sequences):
    with open(path, "w", encoding="utf-8") as fh:
        for seq in sequences:
            fh.write(sequence_to_json(seq))
            fh.write("\n")


def read_sequences(path) -> list[Sequence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(sequence_from_json(line))
    return out
