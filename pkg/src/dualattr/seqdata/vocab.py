"""Categorical feature vocabulary.

Every (field, value) pair seen often enough maps to a dense row index in
one shared embedding table; each field additionally reserves an unknown
index that absorbs rare and unseen values. Indices are assigned in
sorted (field, value) order, so building is deterministic and the
save/load round trip is bit-exact.
"""

from __future__ import annotations

import json
from collections import Counter

from ..errors import ConfigError, ContractError

_FILE_TAG = "dualattr-vocab\t1"


class FeatureVocab:
    def __init__(self, value_index: dict[str, dict[str, int]], unknown_index: dict[str, int]):
        self._values = value_index
        self._unknown = unknown_index
        self.rows = len(unknown_index) + sum(len(m) for m in value_index.values())

    @property
    def fields(self) -> list[str]:
        return sorted(self._unknown)

    def index(self, f: str, value: str) -> int:
        """Dense row index for a field value; rare/unseen values hit the
        field's unknown slot."""
        try:
            per_field = self._values[f]
        except KeyError:
            raise ContractError(f"vocab has no field {f!r}") from None
        return per_field.get(value, self._unknown[f])

    def unknown(self, f: str) -> int:
        return self._unknown[f]

    def known_values(self, f: str) -> dict[str, int]:
        return dict(self._values[f])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{_FILE_TAG}\n")
            rows = []
            for f in self.fields:
                rows.extend((idx, f, "v", v) for v, idx in self._values[f].items())
                rows.append((self._unknown[f], f, "unk", ""))
            for idx, f, kind, v in sorted(rows):
                fh.write(f"{json.dumps(f)}\t{kind}\t{json.dumps(v)}\t{idx}\n")

    @classmethod
    def load(cls, path) -> "FeatureVocab":
        values: dict[str, dict[str, int]] = {}
        unknown: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            if fh.readline().rstrip("\n") != _FILE_TAG:
                raise ConfigError(f"{path} is not a vocab file")
            for line in fh:
                f_json, kind, v_json, idx = line.rstrip("\n").split("\t")
                f = json.loads(f_json)
                if kind == "unk":
                    unknown[f] = int(idx)
                else:
                    values.setdefault(f, {})[json.loads(v_json)] = int(idx)
        for f in unknown:
            values.setdefault(f, {})
        return cls(values, unknown)


def build_vocab(sequences, min_count: int = 1) -> FeatureVocab:
    """Index every categorical value observed at least min_count times."""
    if min_count < 1:
        raise ConfigError(f"min_count must be >= 1, got {min_count}")
    counts: dict[str, Counter] = {}
    for seq in sequences:
        for point in seq.points:
            for f, v in point.features:
                counts.setdefault(f, Counter())[v] += 1

    value_index: dict[str, dict[str, int]] = {}
    unknown_index: dict[str, int] = {}
    next_idx = 0
    for f in sorted(counts):
        per_field = {}
        for v in sorted(v for v, c in counts[f].items() if c >= min_count):
            per_field[v] = next_idx
            next_idx += 1
        value_index[f] = per_field
        unknown_index[f] = next_idx
        next_idx += 1
    return FeatureVocab(value_index, unknown_index)
