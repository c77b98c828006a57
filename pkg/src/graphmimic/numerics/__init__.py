"""Minimal dense-tensor arithmetic with reverse-mode autodiff."""

from .optim import OptimizerState, adam_init, adam_step
from .tensor import (
    DTYPE,
    LOG_FLOOR,
    ShapeError,
    Tensor,
    activation,
    add,
    backward,
    clamp,
    cross_entropy,
    div,
    entropy,
    exp,
    gather_rows,
    leaky_relu,
    log,
    matmul,
    mean_rows,
    minimum,
    mul,
    neg,
    pick,
    relu,
    reshape,
    scale,
    segment_aggregate,
    segment_mean,
    segment_softmax,
    segment_sum,
    sigmoid,
    softmax,
    sub,
    sum_all,
    tanh,
    zero_grad,
)

__all__ = [
    "DTYPE", "LOG_FLOOR", "ShapeError", "Tensor", "OptimizerState",
    "activation", "adam_init", "adam_step", "add", "backward", "clamp",
    "cross_entropy", "div", "entropy", "exp", "gather_rows", "leaky_relu",
    "log", "matmul", "mean_rows", "minimum", "mul", "neg", "pick", "relu",
    "reshape", "scale", "segment_aggregate", "segment_mean",
    "segment_softmax", "segment_sum", "sigmoid", "softmax", "sub",
    "sum_all", "tanh", "zero_grad",
]
