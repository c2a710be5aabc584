"""Command-line front end.

Subcommands:
  run          train one method variant over a schedule, write metrics.csv
               and report.json
  ablate       run the full variant ladder, write ladder.csv
  gen-data     write synthetic train/test CSVs
  check-grads  finite-difference check of every loss gradient

The default output directory is taken from $MLCIL_OUT_DIR when --out is
not given.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .checks import run_gradient_checks
from .config import parse_config, parse_scenario
from .data import SynthSpec, save_dataset, synth_dataset
from .errors import MlcilError
from .metrics import write_metrics_csv, write_report_json
from .trainer import LADDER_VARIANTS, RunConfig, ablation_ladder, run_experiment

OUT_DIR_ENV = "MLCIL_OUT_DIR"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None,
                        help="path to a sectioned key/value config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key")
    parser.add_argument("--scenario", type=str, default=None,
                        help="schedule spec, e.g. B4-C2")
    parser.add_argument("--method", type=str, default=None,
                        help="method variant name")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=str, default=None,
                        help=f"output directory (default ${OUT_DIR_ENV} or cwd)")
    parser.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamps from reports")


def _resolve_config(args) -> RunConfig:
    config = parse_config(args.config, args.overrides)
    if args.scenario:
        base, increment = parse_scenario(args.scenario)
        config = replace(config, base=base, increment=increment)
    if args.method:
        config = replace(config, variant=args.method)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config.validate()


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _timestamp(args) -> str | None:
    if args.no_timestamp:
        return None
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def cmd_run(args) -> int:
    config = _resolve_config(args)
    out = _out_dir(args)
    report, state = run_experiment(config)
    write_metrics_csv(report.rows, out / "metrics.csv")
    write_report_json(report, config.to_dict(), out / "report.json",
                      seed=config.seed, timestamp=_timestamp(args))
    if args.dump_buffer and len(state.buffer):
        class_names = _class_names(config)
        state.buffer.dump_csv(out / "buffer_dump.csv", class_names)
    print(f"final mAP={report.last_map:.4f} CF1={report.last_cf1:.4f} "
          f"OF1={report.last_of1:.4f} FPR={report.last_fpr:.4f} "
          f"avg mAP={report.avg_map:.4f}")
    return 0


def _class_names(config: RunConfig):
    from .trainer import _make_data
    train_set, _ = _make_data(config)
    return train_set.class_names


def cmd_ablate(args) -> int:
    config = _resolve_config(args)
    out = _out_dir(args)
    seeds = ([int(s) for s in args.seeds.split(",")] if args.seeds
             else [config.seed])
    results = ablation_ladder(config, seeds=seeds)
    lines = ["variant,mean_last_mAP,mean_last_CF1,mean_last_OF1,"
             "mean_last_FPR,mean_avg_mAP"]
    for name in LADDER_VARIANTS:
        reports = results[name]
        row = [name]
        for attr in ("last_map", "last_cf1", "last_of1", "last_fpr", "avg_map"):
            row.append(f"{np.mean([getattr(r, attr) for r in reports]):.6f}")
        lines.append(",".join(row))
        print(lines[-1])
    (out / "ladder.csv").write_text("\n".join(lines) + "\n")
    return 0


def cmd_gen_data(args) -> int:
    config = _resolve_config(args)
    out = _out_dir(args)
    spec = SynthSpec(num_classes=config.num_classes,
                     feature_dim=config.feature_dim,
                     cooccurrence=config.cooccurrence,
                     noise_scale=config.noise_scale,
                     train_samples=config.train_samples,
                     test_samples=config.test_samples,
                     target_positives=config.target_positives,
                     seed=config.seed)
    train_set, test_set = synth_dataset(spec)
    save_dataset(train_set, out / "train.csv")
    save_dataset(test_set, out / "test.csv")
    print(f"wrote {out / 'train.csv'} and {out / 'test.csv'}")
    return 0


def cmd_check_grads(args) -> int:
    seed = args.seed if args.seed is not None else 0
    worst = run_gradient_checks(draws=args.draws, seed=seed,
                                tolerance=args.tolerance)
    failed = False
    for name, err in worst.items():
        status = "ok" if err <= args.tolerance else "FAIL"
        print(f"{name:10s} max relative error {err:.3e}  [{status}]")
        failed = failed or err > args.tolerance
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlcil",
        description="Multi-label class-incremental learning experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_common(p_run)
    p_run.add_argument("--dump-buffer", action="store_true",
                       help="also write buffer_dump.csv")
    p_run.set_defaults(func=cmd_run)

    p_abl = sub.add_parser("ablate", help="run the variant ladder")
    _add_common(p_abl)
    p_abl.add_argument("--seeds", type=str, default=None,
                       help="comma-separated seed list (default: --seed)")
    p_abl.set_defaults(func=cmd_ablate)

    p_gen = sub.add_parser("gen-data", help="write synthetic dataset CSVs")
    _add_common(p_gen)
    p_gen.set_defaults(func=cmd_gen_data)

    p_chk = sub.add_parser("check-grads", help="finite-difference loss checks")
    p_chk.add_argument("--draws", type=int, default=100)
    p_chk.add_argument("--tolerance", type=float, default=1e-5)
    p_chk.add_argument("--seed", type=int, default=None)
    p_chk.set_defaults(func=cmd_check_grads)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MlcilError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
