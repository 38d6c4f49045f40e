"""Two-stage training schedule.

Stage 1 minimizes the click-prediction loss alone. Once that objective
converges on the validation split, stage 2 turns on conversion training
and minimizes the sum of both losses. Convergence of either stage means
the watched validation loss rose in two successive epochs. The returned
parameters are the stage-2 checkpoint with the best validation
conversion loss.

Stage 1 builds its optimizer over the click-path parameter groups only
(embedding, encoder, decoder, click head), so the conversion-side
parameters provably receive zero updates before the stage boundary; the
per-epoch curates record that count.

Single-attention (arnn) mode has no click objective, so it skips stage 1
and trains the conversion loss alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, NumericalError
from ..seqdata import FeatureVocab, Sequence
from ..tensorcore import Adam, Graph, ops
from .config import DarnnConfig
from .model import DarnnModel, click_loss, conversion_loss
from .params import DarnnParams

log = logging.getLogger(__name__)

STAGE_CLICK = 1
STAGE_CONVERSION = 2


def two_successive_rises(losses) -> bool:
    """True once the last two epochs each increased the watched loss."""
    if len(losses) < 3:
        return False
    return losses[-1] > losses[-2] and losses[-2] > losses[-3]


@dataclass
class EpochStats:
    stage: int
    epoch: int
    train_click_loss: float | None
    train_conversion_loss: float | None
    val_click_loss: float | None
    val_conversion_loss: float | None
    conversion_updates: int


@dataclass
class TrainResult:
    params: DarnnParams
    curves: list[EpochStats] = field(default_factory=list)
    stage1_epochs: int = 0
    stage2_epochs: int = 0
    best_val_conversion_loss: float | None = None

    @property
    def stage_boundary(self) -> int:
        """Index of the first epoch that optimizes the conversion loss."""
        return self.stage1_epochs


class _Batcher:
    """Same-length batches with a seeded reshuffle every epoch."""

    def __init__(self, model: DarnnModel, sequences: list[Sequence], batch_size: int):
        self.batch_size = batch_size
        self.items = [
            (model.index_sequence(s),
             np.array([p.click for p in s.points], dtype=np.float64),
             float(s.converted))
            for s in sequences
        ]
        self.buckets: dict[int, list[int]] = {}
        for i, (idx, _, _) in enumerate(self.items):
            self.buckets.setdefault(idx.shape[0], []).append(i)

    def epoch(self, rng: np.random.Generator):
        chunks = []
        for m in sorted(self.buckets):
            members = [self.buckets[m][i] for i in rng.permutation(len(self.buckets[m]))]
            for lo in range(0, len(members), self.batch_size):
                chunks.append(members[lo : lo + self.batch_size])
        order = rng.permutation(len(chunks))
        for k in order:
            chunk = chunks[k]
            idx = np.stack([self.items[i][0] for i in chunk])
            clicks = np.stack([self.items[i][1] for i in chunk])
            labels = np.array([self.items[i][2] for i in chunk])
            yield idx, clicks, labels

    def fixed(self):
        rng = np.random.default_rng(0)
        yield from self.epoch(rng)


def _epoch_losses(model: DarnnModel, batcher: _Batcher) -> tuple[float, float | None]:
    """Total click and conversion losses over a dataset (teacher-forced,
    no gradients)."""
    total_click = 0.0
    total_conv = 0.0
    for idx, clicks, labels in batcher.fixed():
        out = model.forward_batch(idx, clicks, teacher_forcing=True)
        if model.config.dual:
            total_click += click_loss(out.click_probs, clicks).item()
        total_conv += conversion_loss(out.conversion_probs, labels).item()
    return total_click, total_conv


def _click_path_tensors(params: DarnnParams):
    groups = params.groups()
    tensors = []
    for name in ("embedding", "encoder", "decoder", "click_head"):
        tensors.extend(groups[name].values())
    return tensors


def train_two_stage(train_sequences: list[Sequence],
                    validation_sequences: list[Sequence],
                    config: DarnnConfig, vocab: FeatureVocab,
                    seed: int = 0) -> TrainResult:
    """Train a model under the two-stage schedule; fully seed-deterministic."""
    if not train_sequences:
        raise ContractError("training set is empty")
    if not any(s.converted for s in train_sequences) or all(s.converted for s in train_sequences):
        raise ContractError("training set needs both converted and non-converted sequences")
    if not validation_sequences:
        raise ContractError("validation set is empty")

    init_seed, shuffle_seed = (int(s.generate_state(1)[0])
                               for s in np.random.SeedSequence(seed).spawn(2))
    model = DarnnModel(config, vocab, seed=init_seed)
    rng = np.random.default_rng(shuffle_seed)
    train_batches = _Batcher(model, train_sequences, config.batch_size)
    val_batches = _Batcher(model, validation_sequences, config.batch_size)

    result = TrainResult(params=model.params)
    epoch_counter = 0

    def run_stage(stage: int) -> int:
        nonlocal epoch_counter
        if stage == STAGE_CLICK:
            optimizer = Adam(_click_path_tensors(model.params), lr=config.learning_rate)
        else:
            optimizer = Adam(model.params.tensors(), lr=config.learning_rate)
        watched: list[float] = []
        best_snapshot = None
        epochs_run = 0
        for local_epoch in range(config.max_epochs):
            n_conv_updates = 0
            total_click = 0.0
            total_conv = 0.0
            for b, (idx, clicks, labels) in enumerate(train_batches.epoch(rng)):
                with Graph() as graph:
                    out = model.forward_batch(idx, clicks, teacher_forcing=True)
                    if config.dual:
                        loss_click = click_loss(out.click_probs, clicks)
                        total_click += loss_click.item()
                    if stage == STAGE_CLICK:
                        loss = loss_click
                    else:
                        loss_conv = conversion_loss(out.conversion_probs, labels)
                        total_conv += loss_conv.item()
                        loss = ops.add(loss_click, loss_conv) if config.dual else loss_conv
                        n_conv_updates += 1
                    if not np.isfinite(loss.values).all():
                        raise NumericalError(
                            f"non-finite loss in stage {stage}, epoch {local_epoch}, batch {b}")
                    graph.backward(loss)
                optimizer.step()

            val_click, val_conv = _epoch_losses(model, val_batches)
            stats = EpochStats(
                stage=stage,
                epoch=epoch_counter,
                train_click_loss=total_click if config.dual else None,
                train_conversion_loss=total_conv if stage == STAGE_CONVERSION else None,
                val_click_loss=val_click if config.dual else None,
                val_conversion_loss=val_conv if stage == STAGE_CONVERSION else None,
                conversion_updates=n_conv_updates,
            )
            result.curves.append(stats)
            epoch_counter += 1
            epochs_run += 1

            watched.append(val_click if stage == STAGE_CLICK else val_conv)
            if stage == STAGE_CONVERSION:
                if result.best_val_conversion_loss is None or val_conv < result.best_val_conversion_loss:
                    result.best_val_conversion_loss = val_conv
                    best_snapshot = model.params.snapshot()
            if two_successive_rises(watched):
                log.info("stage %d converged after %d epochs", stage, epochs_run)
                break
        if stage == STAGE_CONVERSION and best_snapshot is not None:
            model.params.restore(best_snapshot)
        return epochs_run

    if config.dual:
        result.stage1_epochs = run_stage(STAGE_CLICK)
    result.stage2_epochs = run_stage(STAGE_CONVERSION)
    result.params = model.params
    return result
