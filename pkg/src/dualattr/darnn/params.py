"""Trainable parameter containers and their initialization.

Weight matrices start Glorot-uniform, biases at zero except the LSTM
forget gate, which starts at 1.0 to stabilize early recurrent training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CheckpointError
from ..tensorcore import Tensor, glorot_uniform, zeros
from .config import DarnnConfig


@dataclass
class LstmParams:
    """Gate weights, each (input+hidden, hidden), with per-gate biases."""

    W_in: Tensor
    W_forget: Tensor
    W_cell: Tensor
    W_out: Tensor
    b_in: Tensor
    b_forget: Tensor
    b_cell: Tensor
    b_out: Tensor

    @classmethod
    def create(cls, rng, input_size: int, hidden_size: int) -> "LstmParams":
        n = input_size + hidden_size

        def w():
            return glorot_uniform(rng, n, hidden_size, (n, hidden_size))

        p = cls(W_in=w(), W_forget=w(), W_cell=w(), W_out=w(),
                b_in=zeros(hidden_size), b_forget=zeros(hidden_size),
                b_cell=zeros(hidden_size), b_out=zeros(hidden_size))
        p.b_forget.values[:] = 1.0
        return p

    def named(self, prefix: str) -> dict[str, Tensor]:
        return {
            f"{prefix}.W_in": self.W_in, f"{prefix}.W_forget": self.W_forget,
            f"{prefix}.W_cell": self.W_cell, f"{prefix}.W_out": self.W_out,
            f"{prefix}.b_in": self.b_in, f"{prefix}.b_forget": self.b_forget,
            f"{prefix}.b_cell": self.b_cell, f"{prefix}.b_out": self.b_out,
        }


@dataclass
class MlpParams:
    """One-hidden-layer network with a scalar output head."""

    W1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor

    @classmethod
    def create(cls, rng, input_size: int, hidden_size: int) -> "MlpParams":
        return cls(
            W1=glorot_uniform(rng, input_size, hidden_size, (input_size, hidden_size)),
            b1=zeros(hidden_size),
            w2=glorot_uniform(rng, hidden_size, 1, (hidden_size,)),
            b2=zeros(()),
        )

    def named(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.W1": self.W1, f"{prefix}.b1": self.b1,
                f"{prefix}.w2": self.w2, f"{prefix}.b2": self.b2}


@dataclass
class DarnnParams:
    """All trainable tensors of the model.

    The decoder, click head, click-level energy network, and gate network
    are absent in single-attention (arnn) mode.
    """

    embedding: Tensor
    encoder: LstmParams
    energy_impression: MlpParams
    conversion_head: MlpParams
    decoder: LstmParams | None = None
    click_head: MlpParams | None = None
    energy_click: MlpParams | None = None
    gate_net: MlpParams | None = None

    def named(self) -> dict[str, Tensor]:
        out = {"embedding": self.embedding}
        out.update(self.encoder.named("encoder"))
        out.update(self.energy_impression.named("energy_impression"))
        out.update(self.conversion_head.named("conversion_head"))
        if self.decoder is not None:
            out.update(self.decoder.named("decoder"))
            out.update(self.click_head.named("click_head"))
            out.update(self.energy_click.named("energy_click"))
            out.update(self.gate_net.named("gate_net"))
        return out

    def groups(self) -> dict[str, dict[str, Tensor]]:
        """Parameter-group view, keyed the way the gradient checks report."""
        out = {
            "embedding": {"embedding": self.embedding},
            "encoder": self.encoder.named("encoder"),
            "energy_impression": self.energy_impression.named("energy_impression"),
            "conversion_head": self.conversion_head.named("conversion_head"),
        }
        if self.decoder is not None:
            out["decoder"] = self.decoder.named("decoder")
            out["click_head"] = self.click_head.named("click_head")
            out["energy_click"] = self.energy_click.named("energy_click")
            out["gate_net"] = self.gate_net.named("gate_net")
        return out

    def tensors(self) -> list[Tensor]:
        return list(self.named().values())

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: t.values.copy() for name, t in self.named().items()}

    def restore(self, snapshot: dict[str, np.ndarray]):
        named = self.named()
        for name, values in snapshot.items():
            named[name].values[...] = values


def init_params(config: DarnnConfig, vocab_rows: int, n_fields: int,
                seed: int = 0) -> DarnnParams:
    """Deterministically initialize all parameter groups for a vocab size."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    embed_dim = n_fields * config.embedding_size
    hidden = config.hidden_size
    # Keep at least one embedding row so degenerate vocabs still evaluate.
    table = glorot_uniform(rng, max(vocab_rows, 1), config.embedding_size,
                           (max(vocab_rows, 1), config.embedding_size))
    params = DarnnParams(
        embedding=table,
        encoder=LstmParams.create(rng, embed_dim, hidden),
        energy_impression=MlpParams.create(rng, hidden + embed_dim, config.energy_hidden_size),
        conversion_head=MlpParams.create(rng, hidden, config.conv_hidden_size),
    )
    if config.dual:
        params.decoder = LstmParams.create(rng, 1 + hidden, hidden)
        params.click_head = MlpParams.create(rng, 1 + hidden, config.click_hidden_size)
        params.energy_click = MlpParams.create(rng, hidden + embed_dim, config.energy_hidden_size)
        params.gate_net = MlpParams.create(rng, embed_dim + hidden, config.gate_hidden_size)
    return params


def params_from_arrays(config: DarnnConfig, arrays: dict[str, np.ndarray]) -> DarnnParams:
    """Rebuild a DarnnParams from checkpointed arrays, verifying coverage."""
    vocab_rows = arrays.get("embedding")
    if vocab_rows is None:
        raise CheckpointError("checkpoint lacks the embedding table")
    embed_dim = arrays["encoder.W_in"].shape[0] - arrays["encoder.b_in"].shape[0]
    n_fields, rem = divmod(embed_dim, config.embedding_size)
    if rem or n_fields < 1:
        raise CheckpointError("embedding width inconsistent with config.embedding_size")
    params = init_params(config, arrays["embedding"].shape[0], n_fields, seed=0)
    named = params.named()
    missing = set(named) - set(arrays)
    extra = set(arrays) - set(named)
    if missing or extra:
        raise CheckpointError(f"checkpoint keys mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
    for name, values in arrays.items():
        if named[name].values.shape != values.shape:
            raise CheckpointError(
                f"{name}: checkpoint shape {values.shape} != expected {named[name].values.shape}")
        named[name].values[...] = values
    return params
