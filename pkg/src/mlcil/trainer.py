"""Incremental training loop: per-task epochs, old-model snapshotting,
variant-dependent loss composition, memory updates, and the relabeling
step at each task boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace, asdict
from typing import Optional

import numpy as np

from . import losses
from .data import (Dataset, SynthSpec, TaskSchedule, build_schedule,
                   load_dataset, mask_labels, synth_dataset)
from .errors import ConfigError, ProtocolError
from .memory import MemoryBuffer
from .metrics import MetricsReport, MetricsRow, aggregate, evaluate
from .net import Classifier, ModelSnapshot, OptimizerState, optimizer_step, snapshot


@dataclass(frozen=True)
class VariantSpec:
    """What a method variant turns on."""
    asymmetric_cls: bool
    distill: Optional[str]      # None | "kd" | "akd"
    replay_loss: Optional[str]  # None | "bce" | "er"
    relabels: bool


METHOD_VARIANTS: dict[str, VariantSpec] = {
    "fine_tuning":    VariantSpec(False, None,  None,  False),
    "kd":             VariantSpec(False, "kd",  None,  False),
    "akd_cls_only":   VariantSpec(True,  None,  None,  False),
    "akd":            VariantSpec(True,  "akd", None,  False),
    "akd_replay_bce": VariantSpec(True,  "akd", "bce", False),
    "akd_or_bce":     VariantSpec(True,  "akd", "bce", True),
    "rebll":          VariantSpec(True,  "akd", "er",  True),
}


@dataclass
class RunConfig:
    """Everything a run needs; defaults follow the reference hyperparameters
    with a desk-scale data profile."""

    # schedule
    base: int = 4
    increment: int = 2
    # dataset: synthetic by default, or CSV paths
    num_classes: int = 12
    feature_dim: int = 16
    cooccurrence: float = 0.35
    noise_scale: float = 0.3
    target_positives: float = 2.5
    train_samples: int = 600
    test_samples: int = 400
    train_csv: Optional[str] = None
    test_csv: Optional[str] = None
    drop_task_negatives: bool = False
    # model
    hidden_dim: int = 64
    # loss hyperparameters
    alpha: float = 1.2
    beta: float = 0.7
    lambda_akd: float = 0.15
    lambda_er: float = 0.30
    decay_mode: str = "adaptive"
    log_base: float = np.e
    # relabeling and memory
    relabel_threshold: float = 0.5
    per_class: int = 2
    # optimization
    batch_size: int = 64
    epochs: int = 20
    lr_base: float = 4e-5
    lr_inc: float = 4e-5
    weight_decay: float = 1e-4
    # evaluation
    decision_threshold: float = 0.5
    # run identity
    seed: int = 0
    variant: str = "rebll"

    def validate(self) -> "RunConfig":
        if self.variant not in METHOD_VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; "
                              f"expected one of {sorted(METHOD_VARIANTS)}")
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0 (0 disables down-weighting)")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0 (0 disables down-weighting)")
        if not 0.0 <= self.lambda_akd <= 1.0:
            raise ConfigError("lambda_akd must be in [0, 1]")
        if self.lambda_er < 0:
            raise ConfigError("lambda_er must be >= 0")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("batch_size and epochs must be >= 1")
        if self.decay_mode not in ("adaptive", "fixed"):
            raise ConfigError("decay_mode must be 'adaptive' or 'fixed'")
        if self.per_class < 0:
            raise ConfigError("per_class must be >= 0")
        if not 0.0 < self.relabel_threshold < 1.0:
            raise ConfigError("relabel_threshold must be in (0, 1)")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainState:
    model: Classifier
    opt: OptimizerState
    old_snapshot: Optional[ModelSnapshot]
    buffer: MemoryBuffer
    task_cursor: int = 0
    rows: list[MetricsRow] = field(default_factory=list)


def _make_data(config: RunConfig) -> tuple[Dataset, Dataset]:
    if config.train_csv is not None:
        if config.test_csv is None:
            raise ConfigError("train_csv given without test_csv")
        return (load_dataset(config.train_csv, "train"),
                load_dataset(config.test_csv, "test"))
    spec = SynthSpec(num_classes=config.num_classes,
                     feature_dim=config.feature_dim,
                     cooccurrence=config.cooccurrence,
                     noise_scale=config.noise_scale,
                     train_samples=config.train_samples,
                     test_samples=config.test_samples,
                     target_positives=config.target_positives,
                     seed=config.seed)
    return synth_dataset(spec)


def init_state(config: RunConfig, num_classes: int,
               feature_dim: int) -> TrainState:
    init_rng, = [np.random.default_rng(s) for s in
                 np.random.SeedSequence(config.seed).spawn(1)]
    model = Classifier(feature_dim, config.hidden_dim, num_classes, rng=init_rng)
    opt = OptimizerState(learning_rate=config.lr_base,
                         weight_decay=config.weight_decay)
    return TrainState(model=model, opt=opt, old_snapshot=None,
                      buffer=MemoryBuffer(config.per_class))


def train_task(state: TrainState, t: int, train_set: Dataset,
               schedule: TaskSchedule, config: RunConfig,
               rng: np.random.Generator) -> TrainState:
    """Train one task in-place, then run the boundary protocol:
    memory insertion over the task stream, relabeling (for relabeling
    variants), and snapshotting the freshly trained model."""
    if t != state.task_cursor:
        raise ProtocolError(
            f"task {t} trained out of order (expected {state.task_cursor})")
    variant = METHOD_VARIANTS[config.variant]
    cur = schedule.classes_for(t)
    old = schedule.classes_through(t - 1)
    total_classes = len(cur) + len(old)

    masked = mask_labels(train_set.labels, cur)
    row_idx = np.arange(train_set.num_samples)
    if config.drop_task_negatives:
        keep = train_set.labels[:, cur].sum(axis=1) > 0
        row_idx = row_idx[keep]
    features = train_set.features[row_idx]
    task_labels = masked[row_idx][:, cur]  # definite over the current task

    gamma_cls = losses.decay_exponent(
        config.alpha if variant.asymmetric_cls else 0.0,
        total_classes, config.decay_mode, config.log_base)
    gamma_er = losses.decay_exponent(config.beta, total_classes,
                                     config.decay_mode, config.log_base)

    distilling = variant.distill is not None and t > 0
    gamma_akd = losses.decay_exponent(
        config.alpha if variant.distill == "akd" else 0.0,
        total_classes, config.decay_mode, config.log_base)

    state.opt.learning_rate = config.lr_base if t == 0 else config.lr_inc
    n = features.shape[0]

    for _ in range(config.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = perm[start:start + config.batch_size]
            xb = features[batch]
            yb = task_labels[batch]
            nb = len(batch)

            probs, cache = state.model.forward_with_cache(xb)
            l_cls = losses.cls_loss(probs[:, cur], yb, gamma_cls)

            dprobs = np.zeros_like(probs)
            if distilling:
                old_probs = state.old_snapshot.forward(xb)[:, old]
                l_dis = losses.akd_loss(probs[:, old], old_probs, gamma_akd)
                # the plain-distillation baseline is the unweighted sum of
                # its two terms; the asymmetric variants use the convex mix
                w_cls, w_dis = ((config.lambda_akd, 1 - config.lambda_akd)
                                if variant.distill == "akd" else (1.0, 1.0))
                dprobs[:, cur] = w_cls * l_cls.grad
                dprobs[:, old] = w_dis * l_dis.grad
            else:
                dprobs[:, cur] = l_cls.grad
            grads = state.model.backward(cache, dprobs / nb)

            if variant.replay_loss and old.size and len(state.buffer):
                replay = state.buffer.sample_replay(nb, rng)
                xm = np.stack([s.features for s in replay])
                ym = np.stack([s.labels for s in replay])[:, old]
                pm, cm = state.model.forward_with_cache(xm)
                if variant.replay_loss == "er":
                    l_er = losses.er_loss(pm[:, old], ym, gamma_er)
                else:
                    l_er = losses.partial_bce_loss(pm[:, old], ym)
                dpm = np.zeros_like(pm)
                dpm[:, old] = config.lambda_er * l_er.grad
                mem_grads = state.model.backward(cm, dpm / len(replay))
                for name in grads:
                    grads[name] += mem_grads[name]

            optimizer_step(state.model, grads, state.opt)

    # boundary protocol: insert the task stream, relabel, then freeze
    if variant.replay_loss:
        for i in row_idx:
            state.buffer.reservoir_update(train_set.features[i], masked[i],
                                          t, cur, rng)
    if variant.relabels:
        state.buffer.relabel(state.old_snapshot, state.model, schedule, t,
                             config.relabel_threshold)
    state.old_snapshot = snapshot(state.model, t)
    state.task_cursor = t + 1
    return state


def run_experiment(config: RunConfig) -> tuple[MetricsReport, TrainState]:
    """Run the full incremental schedule and evaluate after every task on
    the cumulative label space."""
    config.validate()
    train_set, test_set = _make_data(config)
    schedule = build_schedule(config.base, config.increment,
                              train_set.class_names)
    state = init_state(config, train_set.num_classes, train_set.feature_dim)
    train_rng = np.random.default_rng(
        np.random.SeedSequence(config.seed).spawn(2)[1])

    for t in range(schedule.num_tasks):
        train_task(state, t, train_set, schedule, config, train_rng)
        row = evaluate(state.model, test_set, schedule.classes_through(t),
                       task=t + 1, threshold=config.decision_threshold)
        state.rows.append(row)
    return aggregate(state.rows), state


LADDER_VARIANTS = list(METHOD_VARIANTS) + ["akd_fixed_decay"]


def ablation_ladder(base_config: RunConfig,
                    seeds: list[int] | None = None,
                    variants: list[str] | None = None
                    ) -> dict[str, list[MetricsReport]]:
    """Run every method variant (plus the fixed-decay distillation variant)
    under a shared configuration, one run per seed."""
    seeds = seeds if seeds is not None else [base_config.seed]
    variants = variants if variants is not None else LADDER_VARIANTS
    results: dict[str, list[MetricsReport]] = {}
    for name in variants:
        if name == "akd_fixed_decay":
            cfg = replace(base_config, variant="akd", decay_mode="fixed")
        else:
            cfg = replace(base_config, variant=name)
        results[name] = []
        for seed in seeds:
            report, _ = run_experiment(replace(cfg, seed=seed))
            results[name].append(report)
    return results
