"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ConfigError

MODE_DUAL = "darnn"
MODE_SINGLE = "arnn"


@dataclass
class DarnnConfig:
    """Sizes and training knobs for the dual-attention recurrent model.

    ``mode`` selects the full dual-attention model ("darnn") or the
    encoder-only single-attention ablation ("arnn"), which drops the
    decoder, the click-level attention, and the gate. The head widths
    default to ``hidden_size`` when left at 0.
    """

    embedding_size: int = 8
    hidden_size: int = 16
    energy_hidden_size: int = 0
    gate_hidden_size: int = 0
    click_hidden_size: int = 0
    conv_hidden_size: int = 0
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 30
    mode: str = MODE_DUAL

    def __post_init__(self):
        self.energy_hidden_size = self.energy_hidden_size or self.hidden_size
        self.gate_hidden_size = self.gate_hidden_size or self.hidden_size
        self.click_hidden_size = self.click_hidden_size or self.hidden_size
        self.conv_hidden_size = self.conv_hidden_size or self.hidden_size
        for name in ("embedding_size", "hidden_size", "energy_hidden_size",
                     "gate_hidden_size", "click_hidden_size", "conv_hidden_size",
                     "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.mode not in (MODE_DUAL, MODE_SINGLE):
            raise ConfigError(f"mode must be {MODE_DUAL!r} or {MODE_SINGLE!r}, got {self.mode!r}")

    @property
    def dual(self) -> bool:
        return self.mode == MODE_DUAL

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "DarnnConfig":
        return cls(**doc)
