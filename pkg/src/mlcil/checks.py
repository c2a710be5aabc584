"""Gradient-check harness: verifies the analytic gradients of every loss
(and their composite) against central finite differences, end to end
through the network backward pass.

Used by the ``check-grads`` CLI subcommand and the acceptance tests.
"""

from __future__ import annotations

import numpy as np

from . import losses
from .net import Classifier, grad_check, snapshot

LOSS_NAMES = ("bce", "kd", "cls", "akd", "er", "composite")


def _random_setup(rng: np.random.Generator):
    """Small random model, batch, labels, snapshot, and class split."""
    d, h, c = 4, 5, 6
    model = Classifier(d, h, c, rng=rng)
    for p in model.params.values():
        p += rng.normal(0.0, 0.5, size=p.shape)
    n = int(rng.integers(2, 5))
    x = rng.normal(size=(n, d))
    y = rng.integers(0, 2, size=(n, c)).astype(np.int8)
    old = np.arange(0, 3)
    cur = np.arange(3, c)
    frozen = snapshot(model, 0)
    # perturb after snapshotting so old-model outputs differ from the live
    # model's (otherwise the distillation losses sit at their stationary point)
    for p in model.params.values():
        p += rng.normal(0.0, 0.3, size=p.shape)
    gamma = float(rng.uniform(0.5, 3.0))
    lam_akd = float(rng.uniform(0.05, 0.95))
    lam_er = float(rng.uniform(0.0, 0.6))
    return model, frozen, x, y, cur, old, gamma, lam_akd, lam_er


def _closure(name: str, setup):
    model0, frozen, x, y, cur, old, gamma, lam_akd, lam_er = setup

    def fn(model: Classifier):
        probs, cache = model.forward_with_cache(x)
        dprobs = np.zeros_like(probs)
        if name == "bce":
            lv = losses.bce_loss(probs[:, cur], y[:, cur])
            dprobs[:, cur] = lv.grad
            value = lv.value
        elif name == "cls":
            lv = losses.cls_loss(probs[:, cur], y[:, cur], gamma)
            dprobs[:, cur] = lv.grad
            value = lv.value
        elif name == "kd":
            old_probs = frozen.forward(x)[:, old]
            lv = losses.kd_loss(probs[:, old], old_probs)
            dprobs[:, old] = lv.grad
            value = lv.value
        elif name == "akd":
            old_probs = frozen.forward(x)[:, old]
            lv = losses.akd_loss(probs[:, old], old_probs, gamma)
            dprobs[:, old] = lv.grad
            value = lv.value
        elif name == "er":
            lv = losses.er_loss(probs[:, old], y[:, old], gamma)
            dprobs[:, old] = lv.grad
            value = lv.value
        elif name == "composite":
            old_probs = frozen.forward(x)[:, old]
            l_cls = losses.cls_loss(probs[:, cur], y[:, cur], gamma)
            l_akd = losses.akd_loss(probs[:, old], old_probs, gamma)
            l_er = losses.er_loss(probs[:, old], y[:, old], gamma)
            value = losses.total_loss(l_cls.value, l_akd.value, l_er.value,
                                      lam_akd, lam_er)
            dprobs[:, cur] = lam_akd * l_cls.grad
            dprobs[:, old] = ((1 - lam_akd) * l_akd.grad
                              + lam_er * l_er.grad)
        else:
            raise ValueError(name)
        return value, model.backward(cache, dprobs)

    return fn


def run_gradient_checks(draws: int = 100, seed: int = 0,
                        tolerance: float = 1e-5) -> dict[str, float]:
    """Worst relative error per loss over ``draws`` random model/batch pairs."""
    rng = np.random.default_rng(seed)
    worst = {name: 0.0 for name in LOSS_NAMES}
    for _ in range(draws):
        setup = _random_setup(rng)
        for name in LOSS_NAMES:
            report = grad_check(_closure(name, setup), setup[0],
                                tolerance=tolerance)
            worst[name] = max(worst[name], report.max_rel_error)
    return worst
