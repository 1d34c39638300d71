#!/usr/bin/env python3
"""Train one seed of a recipe and print the per-epoch selection trajectory.

Shows how the peer-agreement selector's threshold, clean ratio, precision
and F1 evolve, next to the small-loss baseline. The same numbers land in
records.csv; this is a quick terminal view for a single seed.

Usage: python scripts/selection_curves.py [--config recipes/idn_040.json] [--seed 1]
"""

import argparse
from pathlib import Path

import numpy as np

from peersel.cli import ExperimentConfig, build_dataset
from peersel.data import split
from peersel.metrics import test_accuracy
from peersel.selectors import baseline_train, pass_train

REPO = Path(__file__).resolve().parent.parent


def show(config_path: str, seed: int) -> None:
    config = ExperimentConfig.from_json(config_path)
    ds = build_dataset(config.dataset, seed)
    parts = split(ds, config.dataset.test_fraction, seed)
    print(f"seed {seed}: n={ds.n} realized_noise_rate={ds.noise_mask.mean():.3f}")

    ensemble, records = pass_train(ds, parts.train, config.selector, config.train, seed)
    print("\npeer-agreement arm (per-epoch mean over the three classifiers):")
    print("epoch  threshold  ratio  precision  recall   f1")
    for epoch in range(config.selector.total_epochs):
        rows = [r for r in records if r.epoch == epoch]
        thr = [r.threshold for r in rows if r.threshold is not None]
        thr_s = f"{np.mean(thr):9.4f}" if thr else "     --- "
        q = lambda field: np.mean([getattr(r.quality, field) for r in rows])
        print(f"{epoch:5d}  {thr_s}  {q('clean_ratio'):5.3f}  {q('precision'):9.3f} "
              f"{q('recall'):7.3f}  {q('f1'):5.3f}")
    acc = test_accuracy(ensemble.members, ds, parts.test)

    sl_params, sl_records = baseline_train(
        ds, parts.train, config.selector, config.train, seed, selector="small_loss"
    )
    none_params, _ = baseline_train(
        ds, parts.train, config.selector, config.train, seed, selector="none"
    )
    final_sl = sl_records[-1].quality
    print(f"\nfinal small-loss selection: precision={final_sl.precision:.3f} f1={final_sl.f1:.3f}")
    print(f"test accuracy: pass={acc:.3f} "
          f"small_loss={test_accuracy(sl_params, ds, parts.test):.3f} "
          f"none={test_accuracy(none_params, ds, parts.test):.3f}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(REPO / "recipes" / "idn_040.json"))
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    show(args.config, args.seed)
