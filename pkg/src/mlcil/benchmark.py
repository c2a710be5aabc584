"""The desk benchmark: a fixed small-scale configuration on which the
method ladder separates cleanly.

The profile is deliberately capacity-starved (6 hidden units against 12
classes on 8 features) and trains only on samples that are positive for at
least one current-task class. Both choices matter: the tiny hidden layer
makes the shared representation the contested resource, which is what the
distillation variants protect, and the positive-only stream produces the
positive-negative imbalance that the asymmetric losses are built for. At
comfortable capacity every variant saturates and the ladder collapses to a
tie.

The seed list is part of the benchmark definition; runs are deterministic,
so results on these seeds are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import replace

from .trainer import RunConfig

DESK_SEEDS: tuple[int, ...] = tuple(range(12))


def desk_config(**overrides) -> RunConfig:
    """Benchmark configuration: 12 classes in a B4-C2 schedule."""
    config = RunConfig(
        base=4,
        increment=2,
        num_classes=12,
        feature_dim=8,
        cooccurrence=0.6,
        noise_scale=0.5,
        target_positives=2.5,
        train_samples=320,
        test_samples=400,
        drop_task_negatives=True,
        hidden_dim=6,
        alpha=0.6,
        beta=0.7,
        lambda_akd=0.3,
        lambda_er=0.15,
        relabel_threshold=0.9,
        per_class=2,
        batch_size=32,
        epochs=20,
        lr_base=0.03,
        lr_inc=0.03,
    )
    return replace(config, **overrides).validate()
