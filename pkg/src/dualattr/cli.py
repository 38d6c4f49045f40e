"""Command-line entry point.

Subcommands walk the whole pipeline against one JSON run config:

  synth      write a demo event log with a planted ground truth
  prepare    parse the log, build/filter/sample sequences, split, vocab
  train      two-stage training of the recurrent model (darnn/arnn)
  eval       AUC and log-loss on the test split
  attribute  per-touch credits for a split, as a TSV
  replay     ROI -> budget plans -> back test, one row per budget fraction
  stats      sequence-length and attribution distribution tables

All outputs are plain data files under the configured out_dir and are
byte-identical across reruns with the same config and seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, attrio, baselines, synth
from .darnn import DarnnConfig, DarnnModel, params_from_arrays, train_two_stage
from .errors import CheckpointError, ConfigError, DualattrError
from .evalkit import (
    allocate_budget,
    auc,
    channel_credit,
    compute_roi,
    events_from_sequences,
    logloss,
    read_events,
    replay,
    report_metrics,
    write_events,
)
from .seqdata import (
    FeatureVocab,
    SchemaConfig,
    build_sequences,
    build_vocab,
    filter_sequences,
    negative_sample,
    parse_events,
    read_sequences,
    train_test_split,
    write_sequences,
)
from .tensorcore import load_tensors, save_tensors

log = logging.getLogger("dualattr")

MODEL_CHOICES = ("darnn", "arnn", "lr", "sp", "first", "last")
DEFAULT_BUDGET_FRACTIONS = (0.5, 0.25, 0.125, 0.0625, 0.03125)


@dataclasses.dataclass
class RunConfig:
    events: str
    schema: str
    out_dir: str
    seed: int = 7
    min_len: int = 3
    max_len: int = 20
    max_duration_days: float = 14.0
    negative_ratio: float = 20.0
    min_count: int = 1
    test_fraction: float = 0.2
    val_fraction: float = 0.1
    model: str = "darnn"
    darnn: DarnnConfig = dataclasses.field(default_factory=DarnnConfig)
    lr_l2: float = 1e-4
    lr_epochs: int = 400
    lr_step: float = 0.5
    budget_fractions: tuple = DEFAULT_BUDGET_FRACTIONS

    def __post_init__(self):
        if self.model not in MODEL_CHOICES:
            raise ConfigError(f"model must be one of {MODEL_CHOICES}, got {self.model!r}")
        if not 0 < self.val_fraction < 1:
            raise ConfigError(f"val_fraction must be in (0,1), got {self.val_fraction}")
        if any(not 0 < f for f in self.budget_fractions):
            raise ConfigError(f"budget fractions must be positive, got {self.budget_fractions}")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        darnn_doc = raw.pop("darnn", {})
        lr_doc = raw.pop("lr_baseline", {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        raw["budget_fractions"] = tuple(raw.get("budget_fractions", DEFAULT_BUDGET_FRACTIONS))
        cfg = cls(darnn=DarnnConfig.from_dict(darnn_doc),
                  lr_l2=lr_doc.get("l2", 1e-4),
                  lr_epochs=lr_doc.get("epochs", 400),
                  lr_step=lr_doc.get("lr", 0.5),
                  **raw)
        return cfg

    def seeds(self) -> dict[str, int]:
        names = ("sampling", "split", "validation", "training")
        state = np.random.SeedSequence(self.seed).generate_state(len(names))
        return {name: int(v) for name, v in zip(names, state)}

    @property
    def out(self) -> Path:
        return Path(self.out_dir)


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config)
    for name in ("events", "schema", "out_dir", "model"):
        value = getattr(args, name.replace("-", "_"), None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "max_epochs", None) is not None:
        cfg.darnn.max_epochs = args.max_epochs
    if cfg.model == "arnn":
        cfg.darnn.mode = "arnn"
    return cfg


def _fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")


def _length_stats_rows(sequences):
    by_len: dict[int, list[int]] = {}
    for s in sequences:
        by_len.setdefault(len(s), []).append(s.converted)
    rows = []
    for m in sorted(by_len):
        labels = by_len[m]
        rows.append((m, len(labels), sum(labels), sum(labels) / len(labels)))
    return rows


# ------------------------------------------------------------- subcommands

def cmd_synth(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = synth.write_log(out / "events.tsv", out / "schema.json",
                        n_sequences=args.sequences, seed=args.seed)
    log.info("wrote %d synthetic sequences to %s", n, out)
    return 0


def cmd_prepare(args) -> int:
    cfg = _load_config(args)
    seeds = cfg.seeds()
    schema = SchemaConfig.from_file(cfg.schema)
    parsed = parse_events(cfg.events, schema)
    if parsed.skipped:
        log.warning("skipped %d malformed rows", parsed.skipped)
    sequences = build_sequences(parsed.records)
    kept = filter_sequences(sequences, cfg.min_len, cfg.max_len, cfg.max_duration_days)
    log.info("parsed %d records -> %d sequences -> %d after filtering",
             len(parsed.records), len(sequences), len(kept))

    cfg.out.mkdir(parents=True, exist_ok=True)
    _write_tsv(cfg.out / "stats.tsv",
               ["length", "sequences", "converted", "conversion_rate"],
               _length_stats_rows(kept))

    sampled = negative_sample(kept, cfg.negative_ratio, rng_seed=seeds["sampling"])
    train, test = train_test_split(sampled, cfg.test_fraction, rng_seed=seeds["split"])
    if not sampled:
        log.warning("no sequences survived preprocessing; artifacts are empty")
    vocab = build_vocab(train, min_count=cfg.min_count)

    write_sequences(cfg.out / "sequences.jsonl", sampled)
    write_sequences(cfg.out / "train.jsonl", train)
    write_sequences(cfg.out / "test.jsonl", test)
    vocab.save(cfg.out / "vocab.tsv")
    write_events(cfg.out / "test_events.tsv", events_from_sequences(test))
    log.info("prepared %d train / %d test sequences (vocab rows: %d)",
             len(train), len(test), vocab.rows)
    return 0


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise ConfigError(f"{path} is missing; run `dualattr {hint}` first")
    return path


def _load_artifacts(cfg: RunConfig):
    train = read_sequences(_require(cfg.out / "train.jsonl", "prepare"))
    test = read_sequences(_require(cfg.out / "test.jsonl", "prepare"))
    vocab = FeatureVocab.load(_require(cfg.out / "vocab.tsv", "prepare"))
    return train, test, vocab


def cmd_train(args) -> int:
    cfg = _load_config(args)
    if cfg.model not in ("darnn", "arnn"):
        raise ConfigError(f"model {cfg.model!r} has no training stage; "
                          "baselines are fitted on the fly by eval/attribute/replay")
    seeds = cfg.seeds()
    train, _, vocab = _load_artifacts(cfg)
    held = max(1, int(round(len(train) * cfg.val_fraction)))
    rng = np.random.default_rng(seeds["validation"])
    order = rng.permutation(len(train))
    val_idx = set(order[:held].tolist())
    fit_seqs = [s for i, s in enumerate(train) if i not in val_idx]
    val_seqs = [s for i, s in enumerate(train) if i in val_idx]

    result = train_two_stage(fit_seqs, val_seqs, cfg.darnn, vocab,
                             seed=seeds["training"])
    save_tensors(cfg.out / "checkpoint.npz", result.params.named())
    meta = {
        "format_version": 1,
        "model": cfg.model,
        "config": cfg.darnn.to_dict(),
        "vocab_rows": vocab.rows,
        "n_fields": len(vocab.fields),
        "stage_boundary_epoch": result.stage_boundary,
        "best_val_conversion_loss": result.best_val_conversion_loss,
    }
    with open(cfg.out / "checkpoint.meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_tsv(cfg.out / "curves.tsv",
               ["epoch", "stage", "train_click_loss", "train_conversion_loss",
                "val_click_loss", "val_conversion_loss", "conversion_updates"],
               [(c.epoch, c.stage, c.train_click_loss, c.train_conversion_loss,
                 c.val_click_loss, c.val_conversion_loss, c.conversion_updates)
                for c in result.curves])
    log.info("trained %s: stage boundary at epoch %d, %d epochs total",
             cfg.model, result.stage_boundary, len(result.curves))
    return 0


def _load_model(cfg: RunConfig, vocab: FeatureVocab) -> DarnnModel:
    arrays = load_tensors(_require(cfg.out / "checkpoint.npz", "train"))
    with open(_require(cfg.out / "checkpoint.meta.json", "train"), encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("format_version") != 1:
        raise CheckpointError(f"unsupported checkpoint format {meta.get('format_version')}")
    if meta.get("model") != cfg.model:
        raise CheckpointError(f"checkpoint was trained as {meta.get('model')!r}, "
                              f"config asks for {cfg.model!r}")
    if meta.get("vocab_rows") != vocab.rows:
        raise CheckpointError(f"checkpoint vocab has {meta.get('vocab_rows')} rows, "
                              f"current vocab has {vocab.rows}")
    model_cfg = DarnnConfig.from_dict(meta["config"])
    params = params_from_arrays(model_cfg, arrays)
    return DarnnModel(model_cfg, vocab, params=params)


def _scores_for(cfg: RunConfig, train, test, vocab) -> np.ndarray:
    if cfg.model in ("darnn", "arnn"):
        return _load_model(cfg, vocab).score(test)
    if cfg.model == "sp":
        stats = baselines.sp_fit(train)
        return np.array([baselines.sp_predict(s, stats) for s in test])
    if cfg.model == "lr":
        model = baselines.lr_fit(train, l2=cfg.lr_l2, epochs=cfg.lr_epochs,
                                 lr=cfg.lr_step)
        return np.array([baselines.lr_predict(s, model) for s in test])
    raise ConfigError(f"model {cfg.model!r} has no conversion predictor to evaluate")


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    train, test, vocab = _load_artifacts(cfg)
    labels = np.array([s.converted for s in test])
    scores = _scores_for(cfg, train, test, vocab)
    doc = {
        "model": cfg.model,
        "auc": auc(scores, labels),
        "logloss": logloss(scores, labels),
        "n_test": len(test),
        "n_test_converted": int(labels.sum()),
    }
    with open(cfg.out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("eval %s: auc=%.4f logloss=%.4f", cfg.model, doc["auc"], doc["logloss"])
    return 0


def _attribution_records(cfg: RunConfig, train, target, vocab):
    if cfg.model in ("darnn", "arnn"):
        return _load_model(cfg, vocab).attribute(target)
    if cfg.model == "sp":
        stats = baselines.sp_fit(train)
        return [baselines.sp_attribute(s, stats) for s in target]
    if cfg.model == "lr":
        model = baselines.lr_fit(train, l2=cfg.lr_l2, epochs=cfg.lr_epochs,
                                 lr=cfg.lr_step)
        return [baselines.lr_attribute(s, model) for s in target]
    return [baselines.rule_attribute(s, cfg.model) for s in target]


def cmd_attribute(args) -> int:
    cfg = _load_config(args)
    train, test, vocab = _load_artifacts(cfg)
    target = train if args.split == "train" else test
    records = _attribution_records(cfg, train, target, vocab)
    out_path = cfg.out / f"attributions_{args.split}.tsv"
    attrio.write_attributions(out_path, target, records)
    log.info("wrote %d sequence attributions to %s", len(target), out_path)
    return 0


def cmd_replay(args) -> int:
    cfg = _load_config(args)
    train = read_sequences(_require(cfg.out / "train.jsonl", "prepare"))
    events = read_events(_require(cfg.out / "test_events.tsv", "prepare"))
    blocks = attrio.read_attributions(
        _require(Path(args.attributions), "attribute --split train"))

    by_id = {s.seq_id: s for s in train}
    aligned = [(by_id[b.sequence_id], b.credits) for b in blocks
               if b.sequence_id in by_id]
    if len(aligned) < len(blocks):
        log.warning("%d attribution rows had no matching train sequence",
                    len(blocks) - len(aligned))
    credit = channel_credit([c for _, c in aligned], [s for s, _ in aligned])

    event_channels = {e.channel for e in events}
    if not set(credit) & event_channels:
        raise ConfigError("attribution channels are disjoint from replay event channels")

    spend: dict[str, float] = {}
    total_train_cost = 0.0
    for s in train:
        for p in s.points:
            spend[p.channel] = spend.get(p.channel, 0.0) + p.cost
            total_train_cost += p.cost
    n_train_conversions = sum(s.converted for s in train)
    if n_train_conversions == 0:
        raise ConfigError("no conversions in the training data; eCPA is undefined")
    conversion_value = total_train_cost / n_train_conversions

    roi = compute_roi(credit, spend, conversion_value)
    total_test_cost = sum(e.cost for e in events)

    rows = []
    # Sanity row first: unlimited per-channel budgets reproduce the raw log.
    unlimited = {c: total_test_cost + 1.0 for c in event_channels}
    metrics = report_metrics(replay(events, unlimited), conversion_value)
    rows.append(("inf", total_test_cost, metrics.conversions, metrics.cost,
                 metrics.cpa, metrics.cvr, metrics.profit, metrics.gross_value))
    for fraction in cfg.budget_fractions:
        plan = allocate_budget(roi, fraction * total_test_cost)
        metrics = report_metrics(replay(events, plan), conversion_value)
        rows.append((fraction, plan.total, metrics.conversions, metrics.cost,
                     metrics.cpa, metrics.cvr, metrics.profit, metrics.gross_value))
    _write_tsv(cfg.out / "replay_report.tsv",
               ["fraction", "budget", "conversions", "cost", "cpa", "cvr",
                "profit", "gross_value"],
               rows)
    log.info("replayed %d events at %d budget levels (V=%.4f)",
             len(events), len(rows), conversion_value)
    return 0


def cmd_stats(args) -> int:
    cfg = _load_config(args)
    seq_path = Path(args.sequences) if args.sequences else cfg.out / "sequences.jsonl"
    sequences = read_sequences(_require(seq_path, "prepare"))
    cfg.out.mkdir(parents=True, exist_ok=True)
    _write_tsv(cfg.out / "seq_stats.tsv",
               ["length", "sequences", "converted", "conversion_rate"],
               _length_stats_rows(sequences))
    if not args.attributions:
        return 0

    blocks = attrio.read_attributions(Path(args.attributions))
    converted = {s.seq_id for s in sequences if s.converted}
    conv_blocks = [b for b in blocks if b.sequence_id in converted]

    position_rows = []
    by_len: dict[int, list] = {}
    for b in conv_blocks:
        by_len.setdefault(len(b.credits), []).append(b.credits)
    for m in sorted(by_len):
        stack = np.stack(by_len[m])
        for j, value in enumerate(stack.mean(axis=0)):
            position_rows.append((m, j, value))
    _write_tsv(cfg.out / "position_credit.tsv",
               ["length", "position", "mean_credit"], position_rows)

    credit: dict[str, float] = {}
    for b in conv_blocks:
        for channel, value in zip(b.channels, b.credits):
            credit[channel] = credit.get(channel, 0.0) + float(value)
    _write_tsv(cfg.out / "channel_credit.tsv", ["channel", "credit"],
               sorted(credit.items()))

    gates = np.array([b.click_gate for b in blocks])
    counts, edges = np.histogram(gates, bins=20, range=(0.0, 1.0))
    _write_tsv(cfg.out / "gate_hist.tsv", ["bin_low", "bin_high", "count"],
               [(edges[i], edges[i + 1], int(counts[i])) for i in range(len(counts))])
    return 0


# ------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualattr",
        description="Multi-touch attribution: train, attribute, and back-test "
                    "budget allocations on ad-event logs.")
    parser.add_argument("--version", action="version", version=f"dualattr {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic demo event log")
    p.add_argument("-o", "--out-dir", required=True)
    p.add_argument("-n", "--sequences", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_synth)

    def with_config(name, help_text):
        q = sub.add_parser(name, help=help_text)
        q.add_argument("-c", "--config", required=True, help="run config JSON")
        q.add_argument("--events", help="override events path")
        q.add_argument("--schema", help="override schema path")
        q.add_argument("--out-dir", dest="out_dir", help="override output directory")
        q.add_argument("--seed", type=int, help="override run seed")
        q.add_argument("--model", choices=MODEL_CHOICES, help="override model choice")
        q.add_argument("--max-epochs", type=int, help="override training epochs per stage")
        return q

    with_config("prepare", "parse, filter, sample, split, build vocab").set_defaults(fn=cmd_prepare)
    with_config("train", "two-stage training (darnn/arnn)").set_defaults(fn=cmd_train)
    with_config("eval", "AUC / log-loss on the test split").set_defaults(fn=cmd_eval)

    p = with_config("attribute", "write per-touch credits for a split")
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.set_defaults(fn=cmd_attribute)

    p = with_config("replay", "budget allocation back test (needs train attributions)")
    p.add_argument("--attributions", required=True,
                   help="attribution TSV for the train split")
    p.set_defaults(fn=cmd_replay)

    p = with_config("stats", "sequence and attribution distribution tables")
    p.add_argument("--sequences", help="sequences JSONL (default: out_dir/sequences.jsonl)")
    p.add_argument("--attributions", help="attribution TSV to summarize")
    p.set_defaults(fn=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.fn(args)
    except (DualattrError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
