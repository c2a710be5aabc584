#!/usr/bin/env python3
"""Sensitivity sweep over the down-weighting coefficient alpha on the desk
benchmark, for both adaptive and fixed decay.

Usage:
    python scripts/sweep_decay_coefficient.py [--seeds 0,1,2,3]
"""

import argparse
from dataclasses import replace

import numpy as np

from mlcil.benchmark import DESK_SEEDS, desk_config
from mlcil.trainer import run_experiment

ALPHAS = (0.0, 0.3, 0.6, 0.9, 1.2)


def mean_final_map(config, seeds):
    return float(np.mean([run_experiment(replace(config, seed=s))[0].last_map
                          for s in seeds]))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=str, default=None)
    args = parser.parse_args()
    seeds = ([int(s) for s in args.seeds.split(",")] if args.seeds
             else list(DESK_SEEDS))

    base = desk_config(variant="akd")
    print(f"{'alpha':>6} {'adaptive':>10} {'fixed':>10}")
    for alpha in ALPHAS:
        adaptive = mean_final_map(replace(base, alpha=alpha), seeds)
        fixed = mean_final_map(
            replace(base, alpha=alpha, decay_mode="fixed"), seeds)
        print(f"{alpha:6.2f} {adaptive:10.4f} {fixed:10.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
