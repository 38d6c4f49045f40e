"""Domain types: touch points, user sequences.

A touch point is one user-ad interaction. Its channel and (bucketed)
timestamp are folded into the categorical feature list so the embedding
layer sees them alongside any side features. The conversion itself is
never a touch point; it only sets the sequence label and time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ContractError


@dataclass(frozen=True)
class TouchPoint:
    """One user-ad interaction.

    features: ordered (field, value) categorical pairs; always includes
        the channel and a bucketed timestamp field.
    click: 1 if the user clicked, 0 for a plain impression.
    timestamp: epoch seconds of the interaction.
    cost: ad spend for this event; 0 when the log carries no cost.
    """

    features: tuple[tuple[str, str], ...]
    click: int
    channel: str
    timestamp: float
    cost: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "features", tuple((str(f), str(v)) for f, v in self.features))
        if self.click not in (0, 1):
            raise ContractError(f"click must be 0 or 1, got {self.click!r}")
        if not self.channel:
            raise ContractError("channel must be non-empty")
        if self.cost < 0:
            raise ContractError(f"cost must be non-negative, got {self.cost}")


@dataclass(frozen=True)
class Sequence:
    """Time-ordered touch points for one user, ending in a conversion label.

    ``seq_index`` disambiguates the segments a multi-conversion user is
    split into; ``seq_id`` is the stable external identifier.
    """

    user_id: str
    points: tuple[TouchPoint, ...]
    converted: int
    conversion_time: float | None = None
    seq_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if self.converted not in (0, 1):
            raise ContractError(f"converted must be 0 or 1, got {self.converted!r}")
        if (self.converted == 1) != (self.conversion_time is not None):
            raise ContractError("converted=1 exactly when conversion_time is set")
        times = [p.timestamp for p in self.points]
        if any(a > b for a, b in zip(times, times[1:])):
            raise ContractError(f"points of {self.user_id} not time-ordered")
        if self.conversion_time is not None and times and self.conversion_time < times[-1]:
            raise ContractError("conversion_time earlier than the last touch point")

    @property
    def seq_id(self) -> str:
        return f"{self.user_id}#{self.seq_index}"

    def __len__(self) -> int:
        return len(self.points)

    @property
    def duration(self) -> float:
        """Seconds between the first and the last touch point."""
        if not self.points:
            return 0.0
        return self.points[-1].timestamp - self.points[0].timestamp
