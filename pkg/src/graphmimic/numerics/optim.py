"""Adam with bias correction over a flat parameter list."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import DTYPE, Tensor


@dataclass
class OptimizerState:
    """Adaptive-moment buffers plus hyperparameters for one parameter list."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_init(params: list[Tensor], lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> OptimizerState:
    state = OptimizerState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    state.m = [np.zeros(p.shape, dtype=DTYPE) for p in params]
    state.v = [np.zeros(p.shape, dtype=DTYPE) for p in params]
    return state


def adam_step(params: list[Tensor], state: OptimizerState) -> None:
    """One in-place Adam update; grads are consumed (reset to None)."""
    if len(params) != len(state.m):
        raise ValueError("parameter list does not match optimizer state")
    for i, p in enumerate(params):
        if p.grad is None:
            raise ValueError(f"parameter {i} has no gradient; call backward first")
    state.step += 1
    t = state.step
    b1, b2 = DTYPE(state.beta1), DTYPE(state.beta2)
    corr1 = DTYPE(1.0 - state.beta1 ** t)
    corr2 = DTYPE(1.0 - state.beta2 ** t)
    lr, eps = DTYPE(state.lr), DTYPE(state.eps)
    for p, m, v in zip(params, state.m, state.v):
        g = p.grad
        m *= b1
        m += (DTYPE(1.0) - b1) * g
        v *= b2
        v += (DTYPE(1.0) - b2) * g * g
        m_hat = m / corr1
        v_hat = v / corr2
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
        p.grad = None
