#!/usr/bin/env python3
"""Run every bundled IDN recipe, then compare the three arms statistically.

For each recipe the three arms (pass, small_loss, none) train on identical
data per seed. Final ensemble/model test accuracies are averaged over seeds
into a dataset-by-method score table, which feeds the Friedman test and the
post-hoc critical-difference analysis.

Usage: python scripts/run_noise_grid.py [--out DIR] [--threads N]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from peersel.cli import main as cli_main

REPO = Path(__file__).resolve().parent.parent
RECIPES = sorted((REPO / "recipes").glob("idn_*.json"))
ARMS = ("pass", "small_loss", "none")


def run(out_dir: Path, threads: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for recipe in RECIPES:
        run_dir = out_dir / recipe.stem
        rc = cli_main(
            ["run", "--config", str(recipe), "--out", str(run_dir), "--threads", str(threads)]
        )
        if rc != 0:
            raise SystemExit(rc)
        summary = json.loads((run_dir / "summary.json").read_text())
        accs = {
            arm: float(np.mean([summary["per_seed"][s][arm]["test_accuracy"]
                                for s in summary["per_seed"]]))
            for arm in ARMS
        }
        rows.append((recipe.stem, accs))
        print(f"{recipe.stem}: " + " ".join(f"{a}={accs[a]:.3f}" for a in ARMS))

    scores_path = out_dir / "arm_scores.csv"
    with open(scores_path, "w", encoding="utf-8") as fh:
        fh.write("dataset," + ",".join(ARMS) + "\n")
        for name, accs in rows:
            fh.write(name + "," + ",".join(f"{accs[a]:.6f}" for a in ARMS) + "\n")
    print(f"wrote {scores_path}")

    rc = cli_main(["stats", str(scores_path), "--alpha", "0.05", "--out", str(out_dir / "stats")])
    if rc != 0:
        raise SystemExit(rc)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/noise_grid")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    run(Path(args.out), args.threads)
