"""The dual-attention recurrent model.

Forward structure, per user sequence of length m:

  encoder   LSTM over embedded touch points -> impression states h_1..h_m
  decoder   LSTM fed [previous click, h_m] each step -> click states
            s_1..s_m, with a sigmoid head predicting each click from
            [previous click, s_j]
  attention softmax over energy scores E(state_j, x_last) gives a weight
            per touch point and a context vector, once over the
            impression states and once over the click states
  gate      a scalar in (0,1) from a two-way softmax over the gate
            network's scores of the two contexts; it weighs how much the
            click-level view contributes
  head      sigmoid conversion probability from the gated mix of the two
            contexts

Per-touch conversion credit is the same gated mix applied to the two
attention weight vectors, so credits are a convex combination of two
softmax distributions and always sum to 1.

In single-attention mode (arnn) the decoder, click attention, and gate
are disabled: prediction uses the impression context alone and the
credit is the impression attention itself.

Sequences are processed in same-length batches (2-D tensors, batch
first); there is no padding anywhere. Previous click labels are
teacher-forced from ground truth during training and replaced by
thresholded (>= 0.5) predictions at inference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..seqdata import FeatureVocab, Sequence, TouchPoint
from ..tensorcore import Tensor, ops
from .config import DarnnConfig
from .params import DarnnParams, LstmParams, MlpParams, init_params


def lstm_step(x: Tensor, h: Tensor, c: Tensor, p: LstmParams) -> tuple[Tensor, Tensor]:
    """One standard LSTM cell step on a (B, input) batch."""
    inp = ops.concat([x, h], axis=1)
    gate_in = ops.sigmoid(ops.add(ops.matmul(inp, p.W_in), p.b_in))
    gate_forget = ops.sigmoid(ops.add(ops.matmul(inp, p.W_forget), p.b_forget))
    gate_out = ops.sigmoid(ops.add(ops.matmul(inp, p.W_out), p.b_out))
    candidate = ops.tanh(ops.add(ops.matmul(inp, p.W_cell), p.b_cell))
    c_next = ops.add(ops.mul(gate_forget, c), ops.mul(gate_in, candidate))
    h_next = ops.mul(gate_out, ops.tanh(c_next))
    return h_next, c_next


def mlp_scalar(x: Tensor, p: MlpParams, output: str = "linear") -> Tensor:
    """(B, n) -> (B,) through one tanh hidden layer and a scalar head."""
    hidden = ops.tanh(ops.add(ops.matmul(x, p.W1), p.b1))
    score = ops.add(ops.matmul(hidden, p.w2), p.b2)
    if output == "sigmoid":
        return ops.sigmoid(score)
    return score


def attention(states: list[Tensor], last_embed: Tensor,
              energy: MlpParams) -> tuple[Tensor, Tensor]:
    """Softmax attention over per-step states.

    Each state is scored by the energy network against the last touch
    point's embedding; the weights are the softmax of those scores and
    the context is the weight-averaged state. Works for both the
    impression states and the click states.
    """
    if not states:
        raise ContractError("attention requires at least one state")
    scores = [mlp_scalar(ops.concat([s, last_embed], axis=1), energy) for s in states]
    weights = ops.softmax(ops.stack_cols(scores))
    context = ops.colmul(ops.pick_col(weights, 0), states[0])
    for j in range(1, len(states)):
        context = ops.add(context, ops.colmul(ops.pick_col(weights, j), states[j]))
    return weights, context


def click_gate(last_embed: Tensor, ctx_impression: Tensor, ctx_click: Tensor,
               gate_net: MlpParams) -> Tensor:
    """Two-way softmax over the gate scores of the two contexts.

    Returns the click branch's share, a (B,) tensor strictly inside
    (0, 1); equal scores give exactly 0.5.
    """
    score_imp = mlp_scalar(ops.concat([last_embed, ctx_impression], axis=1), gate_net)
    score_click = mlp_scalar(ops.concat([last_embed, ctx_click], axis=1), gate_net)
    # exp(a)/(exp(a)+exp(b)) == sigmoid(a-b), with a the click score
    return ops.sigmoid(ops.add(score_click, ops.affine(score_imp, -1.0, 0.0)))


def click_loss(click_probs, clicks) -> Tensor:
    """Summed binary cross-entropy over every touch point in the batch."""
    target = clicks.values if isinstance(clicks, Tensor) else np.asarray(clicks, dtype=np.float64)
    return ops.sum(ops.bce(click_probs, target))


def conversion_loss(conversion_probs, labels) -> Tensor:
    """Summed binary cross-entropy over the sequences in the batch."""
    target = labels.values if isinstance(labels, Tensor) else np.asarray(labels, dtype=np.float64)
    return ops.sum(ops.bce(conversion_probs, target))


def click_sequence_likelihood(click_probs: np.ndarray, clicks: np.ndarray) -> float:
    """Joint likelihood of a click sequence as the product of the emitted
    per-step conditionals."""
    p = np.asarray(click_probs, dtype=np.float64)
    z = np.asarray(clicks, dtype=np.float64)
    return float(np.prod(np.where(z == 1.0, p, 1.0 - p)))


@dataclass
class AttributionRecord:
    """Per-sequence attribution output.

    ``credits`` is the per-touch conversion credit; ``click_gate`` is the
    learned weight of the click-level attention (0.0 in arnn mode, where
    ``click_weights`` and ``click_probs`` are absent).
    """

    conversion_prob: float
    impression_weights: np.ndarray
    click_weights: np.ndarray | None
    click_gate: float
    credits: np.ndarray
    click_probs: np.ndarray | None


@dataclass
class BatchOutput:
    """Forward results for one same-length batch (tensors, batch-first)."""

    conversion_probs: Tensor
    impression_weights: Tensor
    credits: Tensor
    click_probs: Tensor | None = None
    click_weights: Tensor | None = None
    gate: Tensor | None = None


class DarnnModel:
    """Configuration + vocab + parameters, with the forward passes."""

    def __init__(self, config: DarnnConfig, vocab: FeatureVocab,
                 params: DarnnParams | None = None, seed: int = 0):
        self.config = config
        self.vocab = vocab
        self.fields = vocab.fields
        if not self.fields:
            raise ContractError("vocab has no fields; build it from parsed sequences")
        self.params = params if params is not None else init_params(
            config, vocab.rows, len(self.fields), seed=seed)

    # ---------------------------------------------------------------- data

    def index_point(self, point: TouchPoint) -> np.ndarray:
        present = dict(point.features)
        return np.array(
            [self.vocab.index(f, present[f]) if f in present else self.vocab.unknown(f)
             for f in self.fields],
            dtype=np.int64,
        )

    def index_sequence(self, seq: Sequence) -> np.ndarray:
        if len(seq) == 0:
            raise ContractError(f"sequence {seq.seq_id} has no touch points")
        return np.stack([self.index_point(p) for p in seq.points])

    # ------------------------------------------------------------- forward

    def _embed_step(self, idx: np.ndarray) -> Tensor:
        # (B, F) indices -> (B, F * embedding_size), rows concatenated in
        # field order
        batch, n_fields = idx.shape
        rows = ops.lookup(self.params.embedding, idx.reshape(-1))
        return ops.reshape(rows, (batch, n_fields * self.config.embedding_size))

    def _encode(self, idx: np.ndarray) -> tuple[list[Tensor], list[Tensor]]:
        batch, m, _ = idx.shape
        hidden = self.config.hidden_size
        h = Tensor(np.zeros((batch, hidden)))
        c = Tensor(np.zeros((batch, hidden)))
        states, embeds = [], []
        for j in range(m):
            x = self._embed_step(idx[:, j, :])
            h, c = lstm_step(x, h, c, self.params.encoder)
            states.append(h)
            embeds.append(x)
        return states, embeds

    def _decode(self, h_last: Tensor, clicks: np.ndarray,
                teacher_forcing: bool) -> tuple[list[Tensor], list[Tensor]]:
        batch, m = clicks.shape
        hidden = self.config.hidden_size
        s = Tensor(np.zeros((batch, hidden)))
        c = Tensor(np.zeros((batch, hidden)))
        z_prev = Tensor(np.zeros((batch, 1)))
        states, probs = [], []
        for j in range(m):
            s, c = lstm_step(ops.concat([z_prev, h_last], axis=1), s, c, self.params.decoder)
            zhat = mlp_scalar(ops.concat([z_prev, s], axis=1), self.params.click_head,
                              output="sigmoid")
            states.append(s)
            probs.append(zhat)
            if teacher_forcing:
                nxt = clicks[:, j].reshape(batch, 1)
            else:
                nxt = (zhat.values >= 0.5).astype(np.float64).reshape(batch, 1)
            z_prev = Tensor(nxt)
        return states, probs

    def forward_batch(self, idx: np.ndarray, clicks: np.ndarray,
                      teacher_forcing: bool) -> BatchOutput:
        """Run the model on a batch of same-length sequences.

        idx: (B, m, F) vocab row indices; clicks: (B, m) ground-truth
        click labels (used as decoder input only under teacher forcing,
        and always as the click-loss target).
        """
        states, embeds = self._encode(idx)
        x_last = embeds[-1]
        w_imp, ctx_imp = attention(states, x_last, self.params.energy_impression)

        if not self.config.dual:
            yhat = mlp_scalar(ctx_imp, self.params.conversion_head, output="sigmoid")
            return BatchOutput(conversion_probs=yhat, impression_weights=w_imp,
                               credits=w_imp)

        click_states, zhats = self._decode(states[-1], clicks, teacher_forcing)
        w_click, ctx_click = attention(click_states, x_last, self.params.energy_click)
        gate = click_gate(x_last, ctx_imp, ctx_click, self.params.gate_net)
        keep = ops.affine(gate, -1.0, 1.0)
        mixed = ops.add(ops.colmul(keep, ctx_imp), ops.colmul(gate, ctx_click))
        yhat = mlp_scalar(mixed, self.params.conversion_head, output="sigmoid")
        credits = ops.add(ops.colmul(keep, w_imp), ops.colmul(gate, w_click))
        return BatchOutput(conversion_probs=yhat, impression_weights=w_imp,
                           credits=credits, click_probs=ops.stack_cols(zhats),
                           click_weights=w_click, gate=gate)

    # ------------------------------------------------- per-sequence views

    def embed(self, point: TouchPoint) -> np.ndarray:
        """Concatenated embedding rows of one touch point's fields."""
        idx = self.index_point(point)
        return self.params.embedding.values[idx].reshape(-1).copy()

    def encode(self, seq: Sequence) -> list[np.ndarray]:
        """Impression hidden states h_1..h_m for one sequence."""
        idx = self.index_sequence(seq)[None, :, :]
        states, _ = self._encode(idx)
        return [s.values[0].copy() for s in states]

    def decode(self, seq: Sequence, encoder_states: list[np.ndarray] | None = None,
               teacher_forcing: bool = True) -> tuple[list[np.ndarray], np.ndarray]:
        """Click states s_1..s_m and click probabilities for one sequence.

        ``encoder_states`` may be passed to reuse precomputed impression
        states; its length must match the sequence.
        """
        if not self.config.dual:
            raise ContractError("decode is unavailable in single-attention mode")
        if encoder_states is None:
            encoder_states = self.encode(seq)
        if len(encoder_states) != len(seq):
            raise ContractError(
                f"got {len(encoder_states)} encoder states for {len(seq)} touch points")
        h_last = Tensor(np.asarray(encoder_states[-1], dtype=np.float64)[None, :])
        clicks = np.array([[p.click for p in seq.points]], dtype=np.float64)
        states, probs = self._decode(h_last, clicks, teacher_forcing)
        return ([s.values[0].copy() for s in states],
                np.array([z.values[0] for z in probs]))

    def predict_conversion(self, seq: Sequence,
                           teacher_forcing: bool = False) -> tuple[float, AttributionRecord]:
        """Conversion probability plus the full attribution record."""
        record = self.attribute([seq], teacher_forcing=teacher_forcing)[0]
        return record.conversion_prob, record

    def attribute(self, sequences: list[Sequence],
                  teacher_forcing: bool = False) -> list[AttributionRecord]:
        """One attribution record per sequence, in input order."""
        records: list[AttributionRecord | None] = [None] * len(sequences)
        for positions, idx, clicks in self._batches(sequences):
            out = self.forward_batch(idx, clicks, teacher_forcing=teacher_forcing)
            for b, pos in enumerate(positions):
                if self.config.dual:
                    records[pos] = AttributionRecord(
                        conversion_prob=float(out.conversion_probs.values[b]),
                        impression_weights=out.impression_weights.values[b].copy(),
                        click_weights=out.click_weights.values[b].copy(),
                        click_gate=float(out.gate.values[b]),
                        credits=out.credits.values[b].copy(),
                        click_probs=out.click_probs.values[b].copy(),
                    )
                else:
                    records[pos] = AttributionRecord(
                        conversion_prob=float(out.conversion_probs.values[b]),
                        impression_weights=out.impression_weights.values[b].copy(),
                        click_weights=None,
                        click_gate=0.0,
                        credits=out.credits.values[b].copy(),
                        click_probs=None,
                    )
        return records

    def score(self, sequences: list[Sequence],
              teacher_forcing: bool = False) -> np.ndarray:
        """Conversion probabilities for many sequences, in input order."""
        scores = np.empty(len(sequences))
        for positions, idx, clicks in self._batches(sequences):
            out = self.forward_batch(idx, clicks, teacher_forcing=teacher_forcing)
            scores[list(positions)] = out.conversion_probs.values
        return scores

    def _batches(self, sequences, batch_size: int | None = None):
        """Group sequences by length into (positions, idx, clicks) batches."""
        size = batch_size or self.config.batch_size
        buckets: dict[int, list[int]] = {}
        for i, seq in enumerate(sequences):
            buckets.setdefault(len(seq), []).append(i)
        for m, members in sorted(buckets.items()):
            if m == 0:
                raise ContractError("cannot run the model on an empty sequence")
            for lo in range(0, len(members), size):
                chunk = members[lo : lo + size]
                idx = np.stack([self.index_sequence(sequences[i]) for i in chunk])
                clicks = np.array(
                    [[p.click for p in sequences[i].points] for i in chunk],
                    dtype=np.float64,
                )
                yield chunk, idx, clicks
