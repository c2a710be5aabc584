"""Multi-label evaluation: average precision, macro/micro F1, pooled false
positive rate, and incremental-learning aggregation.

Conventions (fixed here since they vary across the literature):
  - AP is non-interpolated, computed over a stable descending sort of the
    scores (ties broken by original index).
  - mAP averages per-class AP over classes with at least one test positive.
  - CF1 is the mean of per-class F1 (F1 defined as 0 when P + R = 0);
    OF1 is micro-F1 from pooled counts; FPR is pooled FP / (FP + TN).
  - Binary decisions use a strict "probability > threshold" rule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import EvaluationError


def average_precision(scores, relevance) -> float:
    """Non-interpolated AP: mean precision at the rank of each relevant item."""
    s = np.asarray(scores, dtype=np.float64)
    r = np.asarray(relevance)
    if s.shape != r.shape or s.ndim != 1:
        raise EvaluationError("scores and relevance must be equal-length vectors")
    n_rel = int(r.sum())
    if n_rel == 0:
        raise EvaluationError("average precision needs at least one relevant item")
    order = np.argsort(-s, kind="stable")
    hits = r[order] == 1
    ranks = np.arange(1, len(s) + 1)
    cum_hits = np.cumsum(hits)
    precisions = cum_hits[hits] / ranks[hits]
    return float(precisions.mean())


@dataclass
class MetricsRow:
    task: int
    label_space_size: int
    map: float
    cf1: float
    of1: float
    fpr: float


@dataclass
class MetricsReport:
    rows: list[MetricsRow]
    last_map: float
    last_cf1: float
    last_of1: float
    last_fpr: float
    avg_map: float


def evaluate_predictions(probs: np.ndarray, labels: np.ndarray,
                         task: int, threshold: float = 0.5) -> MetricsRow:
    """Metrics row from prediction probabilities and definite 0/1 labels,
    both of shape (N, k) over the evaluated label space."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.size == 0 or labels.shape != probs.shape:
        raise EvaluationError("empty or misaligned evaluation inputs")
    n, k = probs.shape

    aps = []
    for c in range(k):
        if labels[:, c].sum() > 0:
            aps.append(average_precision(probs[:, c], labels[:, c]))
    if not aps:
        raise EvaluationError("no class has a positive test label")
    mean_ap = float(np.mean(aps))

    pred = probs > threshold
    pos = labels == 1
    tp = np.sum(pred & pos, axis=0).astype(np.float64)
    fp = np.sum(pred & ~pos, axis=0).astype(np.float64)
    fn = np.sum(~pred & pos, axis=0).astype(np.float64)
    tn = np.sum(~pred & ~pos, axis=0).astype(np.float64)

    per_class_f1 = np.where(2 * tp + fp + fn > 0,
                            2 * tp / np.maximum(2 * tp + fp + fn, 1), 0.0)
    cf1 = float(per_class_f1.mean())

    tp_all, fp_all, fn_all, tn_all = tp.sum(), fp.sum(), fn.sum(), tn.sum()
    of1 = float(2 * tp_all / (2 * tp_all + fp_all + fn_all)) \
        if (2 * tp_all + fp_all + fn_all) > 0 else 0.0
    fpr = float(fp_all / (fp_all + tn_all)) if (fp_all + tn_all) > 0 else 0.0

    return MetricsRow(task=task, label_space_size=k, map=mean_ap,
                      cf1=cf1, of1=of1, fpr=fpr)


def evaluate(model, test_set, class_indices, task: int,
             threshold: float = 0.5) -> MetricsRow:
    """Evaluate a model on a test split over the cumulative label space."""
    idx = np.asarray(class_indices, dtype=np.intp)
    probs = model.forward(test_set.features)[:, idx]
    labels = test_set.labels[:, idx]
    return evaluate_predictions(probs, labels, task=task, threshold=threshold)


def aggregate(rows: list[MetricsRow]) -> MetricsReport:
    """Fold per-task rows into last-task and average blocks."""
    if not rows:
        raise EvaluationError("cannot aggregate zero metric rows")
    last = rows[-1]
    avg_map = float(np.mean([r.map for r in rows]))
    return MetricsReport(rows=list(rows), last_map=last.map, last_cf1=last.cf1,
                         last_of1=last.of1, last_fpr=last.fpr, avg_map=avg_map)


# -- writers ------------------------------------------------------------------

def write_metrics_csv(rows: list[MetricsRow], path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("task,mAP,CF1,OF1,FPR\n")
        for r in rows:
            fh.write(f"{r.task},{r.map:.6f},{r.cf1:.6f},{r.of1:.6f},{r.fpr:.6f}\n")


def write_report_json(report: MetricsReport, config: dict, path,
                      seed: int, timestamp: str | None = None) -> None:
    payload = {
        "config": config,
        "seed": seed,
        "rows": [asdict(r) for r in report.rows],
        "last": {"mAP": report.last_map, "CF1": report.last_cf1,
                 "OF1": report.last_of1, "FPR": report.last_fpr},
        "avg": {"mAP": report.avg_map},
    }
    if timestamp is not None:
        payload["timestamp"] = timestamp
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
