"""Dense numeric substrate: a small MLP classifier with analytic gradients,
an Adam optimizer with L2 weight decay, model snapshots, and a
finite-difference gradient checker.

The classifier is a single-hidden-layer network with tanh activation and a
per-class logistic output head. The output head is sized for the full class
universe from the start; classes that have not been trained yet simply
receive no loss signal.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericsError, ShapeError

# probabilities are kept strictly inside (0, 1) so every log in the losses
# is finite
PROB_FLOOR = 1e-12


def _as_batch(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ShapeError(f"expected 1-D or 2-D feature array, got ndim={x.ndim}")


class Classifier:
    """One-hidden-layer multi-label classifier.

    Parameters live in ``self.params`` as a name -> ndarray dict so the
    optimizer and the gradient checker can treat them uniformly.
    """

    def __init__(self, in_dim: int, hidden_dim: int, out_dim: int,
                 rng: np.random.Generator | None = None):
        self.in_dim = in_dim
        self.hidden_dim = hidden_dim
        self.out_dim = out_dim
        rng = rng if rng is not None else np.random.default_rng(0)
        s1 = 1.0 / np.sqrt(in_dim)
        s2 = 1.0 / np.sqrt(hidden_dim)
        self.params: dict[str, np.ndarray] = {
            "W1": rng.normal(0.0, s1, size=(in_dim, hidden_dim)),
            "b1": np.zeros(hidden_dim),
            "W2": rng.normal(0.0, s2, size=(hidden_dim, out_dim)),
            "b2": np.zeros(out_dim),
        }

    # -- forward / backward ------------------------------------------------

    def forward(self, features: np.ndarray) -> np.ndarray:
        """Per-class probabilities for one sample (1-D) or a batch (2-D)."""
        probs, _ = self.forward_with_cache(features)
        return probs

    def forward_with_cache(self, features: np.ndarray):
        x, squeeze = _as_batch(features)
        if x.shape[1] != self.in_dim:
            raise ShapeError(
                f"feature dim {x.shape[1]} != model input dim {self.in_dim}")
        p = self.params
        z1 = x @ p["W1"] + p["b1"]
        a1 = np.tanh(z1)
        z2 = a1 @ p["W2"] + p["b2"]
        probs = 1.0 / (1.0 + np.exp(-z2))
        probs = np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
        cache = (x, a1, probs)
        if squeeze:
            return probs[0], cache
        return probs, cache

    def backward(self, cache, output_gradient: np.ndarray) -> dict[str, np.ndarray]:
        """Parameter gradients for a batch, given dL/dprobs.

        Gradients are summed over the batch; the caller owns any averaging.
        """
        x, a1, probs = cache
        g, _ = _as_batch(output_gradient)
        if g.shape != probs.shape:
            raise ShapeError(
                f"output gradient shape {g.shape} != probs shape {probs.shape}")
        dz2 = g * probs * (1.0 - probs)
        p = self.params
        grads = {
            "W2": a1.T @ dz2,
            "b2": dz2.sum(axis=0),
        }
        da1 = dz2 @ p["W2"].T
        dz1 = da1 * (1.0 - a1 * a1)
        grads["W1"] = x.T @ dz1
        grads["b1"] = dz1.sum(axis=0)
        return grads

    # -- snapshotting ------------------------------------------------------

    def copy(self) -> "Classifier":
        clone = Classifier.__new__(Classifier)
        clone.in_dim = self.in_dim
        clone.hidden_dim = self.hidden_dim
        clone.out_dim = self.out_dim
        clone.params = {k: v.copy() for k, v in self.params.items()}
        return clone


class ModelSnapshot:
    """Frozen deep copy of a classifier, taken at a task boundary.

    Forward passes never mutate the snapshot; its arrays are write-protected.
    """

    def __init__(self, model: "Classifier | ModelSnapshot", task_index: int):
        src = model._model if isinstance(model, ModelSnapshot) else model
        self._model = src.copy()
        for arr in self._model.params.values():
            arr.flags.writeable = False
        self.task_index = task_index

    @property
    def params(self) -> dict[str, np.ndarray]:
        return self._model.params

    def forward(self, features: np.ndarray) -> np.ndarray:
        return self._model.forward(features)


def snapshot(model, task_index: int = 0) -> ModelSnapshot:
    return ModelSnapshot(model, task_index)


# -- optimizer --------------------------------------------------------------

@dataclass
class OptimizerState:
    """Adam accumulators plus hyperparameters.

    Weight decay is folded into the raw gradient (classic L2 formulation).
    """

    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def optimizer_step(model: Classifier, grads: dict[str, np.ndarray],
                   state: OptimizerState) -> None:
    """One in-place Adam update with bias correction."""
    state.step += 1
    t = state.step
    for name, param in model.params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != param.shape:
            raise ShapeError(
                f"gradient shape {g.shape} != parameter '{name}' shape {param.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericsError(f"non-finite gradient in parameter '{name}'")
        if state.weight_decay:
            g = g + state.weight_decay * param
        if name not in state.m:
            state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)
        state.m[name] = state.beta1 * state.m[name] + (1 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1 - state.beta2) * g * g
        m_hat = state.m[name] / (1 - state.beta1 ** t)
        v_hat = state.v[name] / (1 - state.beta2 ** t)
        param -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)


# -- gradient checking -------------------------------------------------------

@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: str
    worst_index: tuple
    passed: bool
    tolerance: float


def grad_check(loss_and_grad: Callable[[Classifier], tuple[float, dict[str, np.ndarray]]],
               model: Classifier, tolerance: float = 1e-5,
               step: float = 1e-6) -> GradCheckReport:
    """Compare analytic parameter gradients against central differences.

    ``loss_and_grad`` maps the model to (scalar loss, parameter gradients).
    """
    _, analytic = loss_and_grad(model)
    worst = 0.0
    worst_param = ""
    worst_index: tuple = ()
    for name, param in model.params.items():
        it = np.nditer(param, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = param[idx]
            param[idx] = orig + step
            lp, _ = loss_and_grad(model)
            param[idx] = orig - step
            lm, _ = loss_and_grad(model)
            param[idx] = orig
            if not (np.isfinite(lp) and np.isfinite(lm)):
                raise NumericsError(
                    f"loss non-finite at perturbation of '{name}'{idx}")
            numeric = (lp - lm) / (2 * step)
            a = analytic[name][idx]
            # denominator floor keeps central-difference roundoff on
            # near-zero gradients from registering as large relative error
            denom = max(abs(a), abs(numeric), 1e-4)
            rel = abs(a - numeric) / denom
            if rel > worst:
                worst, worst_param, worst_index = rel, name, idx
    return GradCheckReport(max_rel_error=worst, worst_param=worst_param,
                           worst_index=worst_index,
                           passed=worst <= tolerance, tolerance=tolerance)
