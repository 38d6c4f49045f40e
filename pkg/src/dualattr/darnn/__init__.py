"""Dual-attention recurrent model: forward pass, attribution, trainer."""

from .config import MODE_DUAL, MODE_SINGLE, DarnnConfig
from .model import (
    AttributionRecord,
    BatchOutput,
    DarnnModel,
    attention,
    click_gate,
    click_loss,
    click_sequence_likelihood,
    conversion_loss,
    lstm_step,
    mlp_scalar,
)
from .params import DarnnParams, LstmParams, MlpParams, init_params, params_from_arrays
from .training import (
    EpochStats,
    TrainResult,
    train_two_stage,
    two_successive_rises,
)

__all__ = [
    "AttributionRecord",
    "BatchOutput",
    "DarnnConfig",
    "DarnnModel",
    "DarnnParams",
    "EpochStats",
    "LstmParams",
    "MODE_DUAL",
    "MODE_SINGLE",
    "MlpParams",
    "TrainResult",
    "attention",
    "click_gate",
    "click_loss",
    "click_sequence_likelihood",
    "conversion_loss",
    "init_params",
    "lstm_step",
    "mlp_scalar",
    "params_from_arrays",
    "train_two_stage",
    "two_successive_rises",
]
