"""Synthetic ad-log generator with a planted ground truth.

Conversions are driven by one "golden" channel: a sequence converts with
probability 0.9 when any golden-channel touch was clicked and 0.05
otherwise. Clicks themselves are almost fully determined by a slot
feature (top placements get clicked, side placements rarely), so the
click pattern is recoverable from the features. Because the label
function is known by construction, the generator serves as an oracle:
a sound model must rank converted sequences highly and place more
credit on golden touches than elsewhere.
"""

from __future__ import annotations

import json

import numpy as np

from .seqdata import CHANNEL_FIELD, TIME_FIELD, Sequence, TouchPoint
from .seqdata.parse import hour_bucket

GOLDEN_CONVERSION_PROB = 0.9
BASE_CONVERSION_PROB = 0.05

N_CHANNELS = 10
GOLDEN_CHANNEL = "ch07"
GOLDEN_SHARE = 0.15  # marginal probability a touch lands on the golden channel
TOP_SLOT_SHARE = 0.45
CLICK_PROB_TOP = 0.90
CLICK_PROB_SIDE = 0.03

SCHEMA = {
    "user": "uid",
    "timestamp": "ts",
    "channel": "channel",
    "click": "click",
    "cost": "cost",
    "conversion": "conv",
    "features": ["slot", "creative"],
    "delimiter": "\t",
}

_HEADER = ["uid", "ts", "channel", "click", "cost", "conv", "slot", "creative"]


def generate_sequences(n_sequences: int, seed: int = 0,
                       min_len: int = 3, max_len: int = 12) -> list[Sequence]:
    """Sequences straight from the planted model, ready for training."""
    rng = np.random.default_rng(seed)
    others = [f"ch{i:02d}" for i in range(N_CHANNELS) if f"ch{i:02d}" != GOLDEN_CHANNEL]
    sequences = []
    for i in range(n_sequences):
        m = int(rng.integers(min_len, max_len + 1))
        t = 1.7e9 + i * 40000.0
        golden_clicked = False
        points = []
        for _ in range(m):
            if rng.random() < GOLDEN_SHARE:
                channel = GOLDEN_CHANNEL
            else:
                channel = others[rng.integers(0, len(others))]
            top = rng.random() < TOP_SLOT_SHARE
            click = int(rng.random() < (CLICK_PROB_TOP if top else CLICK_PROB_SIDE))
            golden_clicked |= bool(click and channel == GOLDEN_CHANNEL)
            t += float(rng.integers(120, 7200))
            features = (
                (CHANNEL_FIELD, channel),
                (TIME_FIELD, hour_bucket(t)),
                ("slot", "top" if top else "side"),
                ("creative", f"cr{rng.integers(0, 5)}"),
            )
            points.append(TouchPoint(features=features, click=click, channel=channel,
                                     timestamp=t, cost=round(float(rng.uniform(0.05, 1.5)), 4)))
        p_conv = GOLDEN_CONVERSION_PROB if golden_clicked else BASE_CONVERSION_PROB
        converted = int(rng.random() < p_conv)
        sequences.append(Sequence(
            user_id=f"u{i:06d}",
            points=tuple(points),
            converted=converted,
            conversion_time=points[-1].timestamp + 600.0 if converted else None,
        ))
    return sequences


def golden_clicked(seq: Sequence) -> bool:
    """The planted label driver: was a golden-channel touch clicked."""
    return any(p.click and p.channel == GOLDEN_CHANNEL for p in seq.points)


def write_log(events_path, schema_path, n_sequences: int, seed: int = 0) -> int:
    """Emit the generator's output as a raw event log plus its schema file.

    Converted sequences get a conversion-event row at the conversion
    time. Returns the number of sequences written.
    """
    sequences = generate_sequences(n_sequences, seed=seed)
    rows = []
    for seq in sequences:
        feats = None
        for p in seq.points:
            feats = dict(p.features)
            rows.append((p.timestamp, seq.user_id,
                         [seq.user_id, f"{p.timestamp:.10g}", p.channel, str(p.click),
                          f"{p.cost:.10g}", "0", feats["slot"], feats["creative"]]))
        if seq.converted:
            rows.append((seq.conversion_time, seq.user_id,
                         [seq.user_id, f"{seq.conversion_time:.10g}", "-", "0",
                          "0", "1", "-", "-"]))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(events_path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(_HEADER) + "\n")
        for _, _, cells in rows:
            fh.write("\t".join(cells) + "\n")
    if schema_path is not None:
        with open(schema_path, "w", encoding="utf-8") as fh:
            json.dump(SCHEMA, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return len(sequences)
