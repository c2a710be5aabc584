#!/usr/bin/env python3
"""Run the full method ladder on the desk benchmark and print a summary
table (mean over the benchmark seeds, final task).

Usage:
    python scripts/run_desk_benchmark.py [--seeds 0,1,2] [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from mlcil.benchmark import DESK_SEEDS, desk_config
from mlcil.trainer import LADDER_VARIANTS, ablation_ladder


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=str, default=None,
                        help="comma-separated seed list "
                             "(default: the benchmark seeds)")
    parser.add_argument("--out", type=str, default=None,
                        help="also write ladder.csv to this directory")
    args = parser.parse_args()

    seeds = ([int(s) for s in args.seeds.split(",")] if args.seeds
             else list(DESK_SEEDS))
    results = ablation_ladder(desk_config(), seeds=seeds)

    header = f"{'variant':<16} {'mAP':>8} {'CF1':>8} {'OF1':>8} {'FPR':>8}"
    print(header)
    print("-" * len(header))
    lines = ["variant,mean_last_mAP,mean_last_CF1,mean_last_OF1,mean_last_FPR"]
    for name in LADDER_VARIANTS:
        reports = results[name]
        stats = [float(np.mean([getattr(r, a) for r in reports]))
                 for a in ("last_map", "last_cf1", "last_of1", "last_fpr")]
        print(f"{name:<16} " + " ".join(f"{v:8.4f}" for v in stats))
        lines.append(name + "," + ",".join(f"{v:.6f}" for v in stats))

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ladder.csv").write_text("\n".join(lines) + "\n")
        print(f"\nwrote {out / 'ladder.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
