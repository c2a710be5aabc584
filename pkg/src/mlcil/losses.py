"""Loss functions for incremental multi-label training.

Every loss takes prediction/label arrays already restricted to the class
subset it sums over (shape (N, k) for a batch or (k,) for one sample),
returns the summed scalar loss plus the gradient with respect to the
predictions, and leaves batch averaging to the caller.

The asymmetric variants share one mechanism: a down-weighting exponent
``gamma`` applied to the loss part that would otherwise dominate under
positive-negative imbalance. ``gamma`` grows with the number of classes
seen so far (see :func:`decay_exponent`); at ``gamma == 0`` each asymmetric
loss reduces exactly to its plain counterpart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, AnnotationError, RelabelIncompleteError

MISSING = -1  # tri-state label sentinel: -1 missing, 0 negative, 1 positive


@dataclass
class LossValue:
    """Scalar loss (summed over samples and classes) and dL/dpreds."""

    value: float
    grad: np.ndarray


def decay_exponent(coef: float, class_count: int, mode: str = "adaptive",
                   log_base: float = math.e) -> float:
    """Down-weighting exponent for the asymmetric losses.

    Adaptive mode scales with the log of the cumulative class count, so the
    down-weighting strengthens as more classes accumulate; fixed mode returns
    the coefficient unchanged (for the fixed-vs-adaptive comparison).
    """
    if class_count < 1:
        raise ValueError(f"class_count must be >= 1, got {class_count}")
    if mode == "fixed":
        return coef
    if mode != "adaptive":
        raise ValueError(f"unknown decay mode {mode!r}")
    return coef * math.log(class_count) / math.log(log_base)


def _prep(preds, labels, definite: bool, err=AnnotationError):
    p = np.asarray(preds, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p.shape != y.shape:
        raise AlignmentError(f"preds shape {p.shape} != labels shape {y.shape}")
    if definite and np.any(y < 0):
        raise err("labels contain missing entries over the summed class set")
    return p, y


def _pow(base: np.ndarray, gamma: float) -> np.ndarray:
    # 0**0 == 1 so the gamma=0 reduction identities hold exactly
    if gamma == 0.0:
        return np.ones_like(base)
    return base ** gamma


def bce_loss(preds, labels) -> LossValue:
    """Plain per-class binary cross-entropy, summed over the class subset."""
    p, y = _prep(preds, labels, definite=True)
    value = float(np.sum(-y * np.log(p) - (1 - y) * np.log1p(-p)))
    grad = (p - y) / (p * (1 - p))
    return LossValue(value, grad)


def kd_loss(new_preds, old_preds) -> LossValue:
    """Binary distillation: old-model probabilities as soft targets.

    Gradient is with respect to the new predictions only.
    """
    p, q = _prep(new_preds, old_preds, definite=False, err=AlignmentError)
    value = float(np.sum(-q * np.log(p) - (1 - q) * np.log1p(-p)))
    grad = (p - q) / (p * (1 - p))
    return LossValue(value, grad)


def cls_loss(preds, labels, gamma: float) -> LossValue:
    """Classification loss with the positive part down-weighted.

    Positive term: -y * (1-p)^gamma * log p; negative term is verbatim BCE.
    """
    p, y = _prep(preds, labels, definite=True)
    w = _pow(1 - p, gamma)
    value = float(np.sum(-y * w * np.log(p) - (1 - y) * np.log1p(-p)))
    if gamma == 0.0:
        # same arithmetic as bce_loss so the reduction is bit-exact
        grad = (p - y) / (p * (1 - p))
    else:
        # d/dp [-(1-p)^g log p] = g (1-p)^(g-1) log p - (1-p)^g / p
        pos_grad = gamma * _pow(1 - p, gamma - 1) * np.log(p)
        grad = y * (pos_grad - w / p) + (1 - y) / (1 - p)
    return LossValue(value, grad)


def akd_loss(new_preds, old_preds, gamma: float) -> LossValue:
    """Asymmetric distillation: soft-target BCE with the positive
    (old-model-confident) term down-weighted by (1 - new_pred)^gamma."""
    p, q = _prep(new_preds, old_preds, definite=False, err=AlignmentError)
    w = _pow(1 - p, gamma)
    value = float(np.sum(-q * w * np.log(p) - (1 - q) * np.log1p(-p)))
    if gamma == 0.0:
        grad = (p - q) / (p * (1 - p))
    else:
        pos_grad = gamma * _pow(1 - p, gamma - 1) * np.log(p)
        grad = q * (pos_grad - w / p) + (1 - q) / (1 - p)
    return LossValue(value, grad)


def er_loss(preds, labels, gamma: float) -> LossValue:
    """Replay loss with the negative part down-weighted by p^gamma.

    Requires fully annotated labels (relabeling must have completed them).
    """
    p, y = _prep(preds, labels, definite=True, err=RelabelIncompleteError)
    w = _pow(p, gamma)
    value = float(np.sum(-y * np.log(p) - (1 - y) * w * np.log1p(-p)))
    if gamma == 0.0:
        grad = (p - y) / (p * (1 - p))
    else:
        # d/dp [-p^g log(1-p)] = -g p^(g-1) log(1-p) + p^g / (1-p)
        neg_grad = -gamma * _pow(p, gamma - 1) * np.log1p(-p)
        grad = -y / p + (1 - y) * (neg_grad + w / (1 - p))
    return LossValue(value, grad)


def partial_bce_loss(preds, labels) -> LossValue:
    """BCE over only the annotated (non-missing) entries.

    Used by the naive-replay baseline, whose memory labels stay partial.
    Missing entries contribute zero loss and zero gradient.
    """
    p = np.asarray(preds, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p.shape != y.shape:
        raise AlignmentError(f"preds shape {p.shape} != labels shape {y.shape}")
    mask = y >= 0
    ym = np.where(mask, y, 0.0)
    terms = -ym * np.log(p) - (1 - ym) * np.log1p(-p)
    value = float(np.sum(np.where(mask, terms, 0.0)))
    grad = np.where(mask, (p - ym) / (p * (1 - p)), 0.0)
    return LossValue(value, grad)


def total_loss(l_cls: float, l_akd: float, l_er: float,
               lambda_akd: float, lambda_er: float,
               has_old_model: bool = True) -> float:
    """Composite objective: convex mix of classification and distillation
    plus weighted replay. On the first task there is no old model, the
    distillation term is zero, and classification is unscaled."""
    if not has_old_model:
        return l_cls + lambda_er * l_er
    return lambda_akd * l_cls + (1 - lambda_akd) * l_akd + lambda_er * l_er
