"""Attribution output files: one row per touch point.

Columns: sequence_id, position, channel, a_i2v, a_c2v, lambda, attr.
Every attribution producer (the recurrent model and all baselines)
writes this same shape; baselines carry their credit in both a_i2v and
attr with a_c2v and lambda fixed at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .darnn import AttributionRecord
from .errors import ContractError
from .seqdata import Sequence

HEADER = ["sequence_id", "position", "channel", "a_i2v", "a_c2v", "lambda", "attr"]


@dataclass
class AttributionRows:
    sequence_id: str
    channels: list[str]
    impression_weights: np.ndarray
    click_weights: np.ndarray
    click_gate: float
    credits: np.ndarray


def _as_row_block(seq: Sequence, record) -> AttributionRows:
    channels = [p.channel for p in seq.points]
    if isinstance(record, AttributionRecord):
        click_w = (record.click_weights if record.click_weights is not None
                   else np.zeros(len(seq)))
        return AttributionRows(seq.seq_id, channels, record.impression_weights,
                               click_w, record.click_gate, record.credits)
    credits = np.asarray(record, dtype=np.float64)
    if credits.shape != (len(seq),):
        raise ContractError(
            f"sequence {seq.seq_id}: {credits.shape} credits for {len(seq)} touches")
    return AttributionRows(seq.seq_id, channels, credits, np.zeros(len(seq)), 0.0, credits)


def write_attributions(path, sequences: list[Sequence], records):
    """records: AttributionRecord or plain per-touch credit vectors,
    aligned with sequences."""
    if len(sequences) != len(records):
        raise ContractError(f"{len(records)} records for {len(sequences)} sequences")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(HEADER) + "\n")
        for seq, record in zip(sequences, records):
            block = _as_row_block(seq, record)
            for j, channel in enumerate(block.channels):
                fh.write(f"{block.sequence_id}\t{j}\t{channel}\t"
                         f"{block.impression_weights[j]:.10g}\t"
                         f"{block.click_weights[j]:.10g}\t"
                         f"{block.click_gate:.10g}\t{block.credits[j]:.10g}\n")


def read_attributions(path) -> list[AttributionRows]:
    blocks: dict[str, list] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != HEADER:
            raise ContractError(f"{path}: expected header {HEADER}, got {header}")
        for line in fh:
            seq_id, pos, channel, a_imp, a_click, gate, attr = line.rstrip("\n").split("\t")
            if seq_id not in blocks:
                blocks[seq_id] = []
                order.append(seq_id)
            blocks[seq_id].append((int(pos), channel, float(a_imp), float(a_click),
                                   float(gate), float(attr)))
    out = []
    for seq_id in order:
        rows = sorted(blocks[seq_id])
        out.append(AttributionRows(
            sequence_id=seq_id,
            channels=[r[1] for r in rows],
            impression_weights=np.array([r[2] for r in rows]),
            click_weights=np.array([r[3] for r in rows]),
            click_gate=rows[0][4],
            credits=np.array([r[5] for r in rows]),
        ))
    return out
