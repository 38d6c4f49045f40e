"""Ad-event ingestion: parsing, sequence building, filtering, sampling."""

from .io import read_sequences, write_sequences
from .parse import (
    CHANNEL_FIELD,
    TIME_FIELD,
    ParseResult,
    SchemaConfig,
    build_sequences,
    parse_events,
)
from .pipeline import (
    DEFAULT_MAX_DURATION_DAYS,
    DEFAULT_MAX_LEN,
    DEFAULT_MIN_LEN,
    DEFAULT_NEGATIVE_RATIO,
    filter_sequences,
    negative_sample,
    train_test_split,
)
from .types import Sequence, TouchPoint
from .vocab import FeatureVocab, build_vocab

__all__ = [
    "CHANNEL_FIELD",
    "DEFAULT_MAX_DURATION_DAYS",
    "DEFAULT_MAX_LEN",
    "DEFAULT_MIN_LEN",
    "DEFAULT_NEGATIVE_RATIO",
    "FeatureVocab",
    "ParseResult",
    "SchemaConfig",
    "Sequence",
    "TIME_FIELD",
    "TouchPoint",
    "build_sequences",
    "build_vocab",
    "filter_sequences",
    "negative_sample",
    "parse_events",
    "read_sequences",
    "train_test_split",
    "write_sequences",
]
