"""Reproducible experiment runner.

Subcommands:
  generate  write a synthetic noisy dataset CSV
  run       train the peer-agreement arm plus baselines over seeds
  ablate    compare partition methods on identical seeds/data
  stats     Friedman + Nemenyi analysis of a method-by-dataset score table

All randomness flows from the configured seeds through keyed substreams;
reruns with identical configs are byte-identical. Exit codes: 0 success,
2 config/validation error, 3 runtime numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import TrainConfig
from .data import (
    LabeledDataset,
    generate_gaussian_mixture,
    inject_idn_noise,
    inject_symmetric_noise,
    split,
    write_dataset_csv,
)
from .metrics import test_accuracy
from .partition import DegenerateScoresError
from .selectors import (
    EpochRecord,
    SelectorConfig,
    baseline_train,
    pass_train,
    write_records_csv,
)
from .stats import friedman, nemenyi_pairwise, rank_rows, read_scores_csv

ARMS = ("pass", "small_loss", "none")
ABLATION_METHODS = ("otsu", "kmeans", "gmm")


@dataclass
class DatasetConfig:
    n: int = 5000
    d: int = 10
    class_count: int = 5
    separation: float = 6.0
    noise_kind: str = "idn"
    noise_rate: float = 0.4
    test_fraction: float = 0.2

    def __post_init__(self):
        if self.noise_kind not in ("idn", "symmetric"):
            raise ValueError("noise_kind must be 'idn' or 'symmetric'")
        if not (0.0 < self.noise_rate <= 0.95):
            raise ValueError("noise_rate out of range (0, 0.95]")


@dataclass
class ExperimentConfig:
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    output_dir: str = "out"

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seeds must be nonempty")

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {"dataset", "train", "selector", "seeds", "output_dir"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        train_raw = dict(raw.get("train", {}))
        if "hidden_sizes" in train_raw:
            train_raw["hidden_sizes"] = tuple(train_raw["hidden_sizes"])
        return cls(
            dataset=DatasetConfig(**raw.get("dataset", {})),
            train=TrainConfig(**train_raw),
            selector=SelectorConfig(**raw.get("selector", {})),
            seeds=tuple(int(s) for s in raw.get("seeds", (1, 2, 3, 4, 5))),
            output_dir=str(raw.get("output_dir", "out")),
        )

    def echo(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        d["train"]["hidden_sizes"] = list(self.train.hidden_sizes)
        return d


def build_dataset(cfg: DatasetConfig, seed: int) -> LabeledDataset:
    """Generate and corrupt one dataset; identical for every arm at a seed."""
    ds = generate_gaussian_mixture(cfg.n, cfg.d, cfg.class_count, cfg.separation, seed)
    if cfg.noise_kind == "idn":
        return inject_idn_noise(ds, cfg.noise_rate, seed)
    return inject_symmetric_noise(ds, cfg.noise_rate, seed)


def _final_quality(records: list[EpochRecord]) -> dict[str, float]:
    """Mean selection quality of the final epoch's rows (3 rows for pass)."""
    last_epoch = records[-1].epoch
    rows = [r for r in records if r.epoch == last_epoch]
    return {
        "precision": float(np.mean([r.quality.precision for r in rows])),
        "recall": float(np.mean([r.quality.recall for r in rows])),
        "f1": float(np.mean([r.quality.f1 for r in rows])),
        "clean_ratio": float(np.mean([r.quality.clean_ratio for r in rows])),
    }


def _run_seed(config: ExperimentConfig, seed: int) -> dict:
    ds = build_dataset(config.dataset, seed)
    parts = split(ds, config.dataset.test_fraction, seed)
    out: dict = {"seed": seed, "arms": {}}
    ensemble, records = pass_train(ds, parts.train, config.selector, config.train, seed)
    out["arms"]["pass"] = {
        "records": records,
        "final": _final_quality(records),
        "test_accuracy": test_accuracy(ensemble.members, ds, parts.test),
    }
    for arm in ("small_loss", "none"):
        params, records = baseline_train(
            ds, parts.train, config.selector, config.train, seed, selector=arm
        )
        out["arms"][arm] = {
            "records": records,
            "final": _final_quality(records),
            "test_accuracy": test_accuracy(params, ds, parts.test),
        }
    return out


def _run_seed_method(config: ExperimentConfig, seed: int, method: str) -> dict:
    ds = build_dataset(config.dataset, seed)
    parts = split(ds, config.dataset.test_fraction, seed)
    selector = SelectorConfig(
        warmup_epochs=config.selector.warmup_epochs,
        total_epochs=config.selector.total_epochs,
        partition_method=method,
        degenerate_policy=config.selector.degenerate_policy,
        bins=config.selector.bins,
    )
    ensemble, records = pass_train(ds, parts.train, selector, config.train, seed)
    final = _final_quality(records)
    final["test_accuracy"] = test_accuracy(ensemble.members, ds, parts.test)
    return final


def _aggregate(per_seed: dict[str, dict]) -> dict:
    agg: dict = {}
    for arm in ARMS:
        stats = {}
        for key in ("precision", "recall", "f1", "clean_ratio", "test_accuracy"):
            vals = np.array([per_seed[s][arm][key] for s in per_seed])
            stats[f"{key}_mean"] = float(vals.mean())
            stats[f"{key}_std"] = float(vals.std())
        agg[arm] = stats
    return agg


def cmd_generate(config: ExperimentConfig, out_path: str) -> int:
    ds = build_dataset(config.dataset, config.seeds[0])
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(ds, out_path)
    print(f"realized_noise_rate={float(ds.noise_mask.mean()):.6g}")
    print(f"wrote {out_path}")
    return 0


def cmd_run(config: ExperimentConfig, out_dir: str, threads: int = 1) -> int:
    started = time.time()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_seed, [config] * len(config.seeds), config.seeds))
    else:
        results = [_run_seed(config, s) for s in config.seeds]
    per_seed: dict[str, dict] = {}
    for res in results:
        seed = res["seed"]
        seed_dir = out / f"seed_{seed}"
        for arm in ARMS:
            arm_dir = seed_dir / arm
            arm_dir.mkdir(parents=True, exist_ok=True)
            write_records_csv(res["arms"][arm]["records"], str(arm_dir / "records.csv"))
        per_seed[str(seed)] = {
            arm: {**res["arms"][arm]["final"], "test_accuracy": res["arms"][arm]["test_accuracy"]}
            for arm in ARMS
        }
    summary = {
        "tool_version": __version__,
        "config": config.echo(),
        "per_seed": per_seed,
        "aggregate": _aggregate(per_seed),
    }
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    # Wall clock stays out of summary.json so reruns stay byte-identical.
    elapsed = time.time() - started
    with open(out / "timing.txt", "w", encoding="utf-8") as fh:
        fh.write(f"wall_clock_seconds={elapsed:.3f}\n")
    print(f"wrote {out / 'summary.json'} (wall clock {elapsed:.1f}s)")
    return 0


def cmd_ablate(config: ExperimentConfig, out_dir: str, threads: int = 1) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(seed, method) for seed in config.seeds for method in ABLATION_METHODS]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            finals = list(
                pool.map(
                    _run_seed_method,
                    [config] * len(jobs),
                    [s for s, _ in jobs],
                    [m for _, m in jobs],
                )
            )
    else:
        finals = [_run_seed_method(config, s, m) for s, m in jobs]
    with open(out / "ablation.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("seed,method,f1,precision,clean_ratio,test_acc\n")
        for (seed, method), final in zip(jobs, finals):
            fh.write(
                f"{seed},{method},{format(final['f1'], '.17g')},"
                f"{format(final['precision'], '.17g')},"
                f"{format(final['clean_ratio'], '.17g')},"
                f"{format(final['test_accuracy'], '.17g')}\n"
            )
    print(f"wrote {out / 'ablation.csv'}")
    return 0


def cmd_stats(scores_csv: str, alpha: float, out_dir: str) -> int:
    datasets, methods, scores = read_scores_csv(scores_csv)
    rt = rank_rows(scores, higher_is_better=True, methods=methods, datasets=datasets)
    fr = friedman(rt)
    nem = nemenyi_pairwise(rt, alpha)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "statistic": fr.statistic,
        "degrees_of_freedom": fr.degrees_of_freedom,
        "p_value": fr.p_value,
        "alpha": nem.alpha,
        "cd": nem.cd,
        "mean_ranks": nem.mean_ranks,
        "pairs": [
            {
                "method_a": p.method_a,
                "method_b": p.method_b,
                "rank_gap": p.rank_gap,
                "significant": p.significant,
            }
            for p in nem.pairs
        ],
    }
    with open(out / "stats.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "cd_diagram.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("method,mean_rank,cd\n")
        for m in methods:
            fh.write(f"{m},{format(nem.mean_ranks[m], '.17g')},{format(nem.cd, '.17g')}\n")
    print(
        f"friedman statistic={fr.statistic:.6g} p={fr.p_value:.6g} cd={nem.cd:.6g} "
        f"-> {out / 'stats.json'}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peersel",
        description="Peer-agreement sample selection experiments on synthetic noisy labels.",
    )
    parser.add_argument("--version", action="version", version=f"peersel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write a noisy dataset CSV")
    p_gen.add_argument("--config", required=True, help="experiment config JSON")
    p_gen.add_argument("--out", required=True, help="output dataset CSV path")
    p_gen.add_argument("--seeds", help="comma-separated seeds (first is used)")

    for name, help_text in (
        ("run", "train pass/small_loss/none arms over all seeds"),
        ("ablate", "compare otsu/kmeans/gmm partitioning on identical seeds"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", help="output directory (default: config output_dir)")
        p.add_argument("--seeds", help="comma-separated seeds overriding the config")
        p.add_argument("--threads", type=int, default=1, help="parallel seed workers")

    p_stats = sub.add_parser("stats", help="Friedman/Nemenyi analysis of a scores CSV")
    p_stats.add_argument("scores_csv", help="CSV with header dataset,method1,...,methodk")
    p_stats.add_argument("--alpha", type=float, default=0.05, choices=(0.05, 0.10))
    p_stats.add_argument("--out", default="stats_out", help="output directory")
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.from_json(args.config)
    if getattr(args, "seeds", None):
        seeds = tuple(int(s) for s in args.seeds.split(","))
        config = ExperimentConfig(
            dataset=config.dataset,
            train=config.train,
            selector=config.selector,
            seeds=seeds,
            output_dir=config.output_dir,
        )
    return config


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(_load_config(args), args.out)
        if args.command == "run":
            config = _load_config(args)
            return cmd_run(config, args.out or config.output_dir, args.threads)
        if args.command == "ablate":
            config = _load_config(args)
            return cmd_ablate(config, args.out or config.output_dir, args.threads)
        if args.command == "stats":
            return cmd_stats(args.scores_csv, args.alpha, args.out)
        raise ValueError(f"unknown command {args.command!r}")
    except DegenerateScoresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (FloatingPointError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
