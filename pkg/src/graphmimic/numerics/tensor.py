"""Dense float32 tensors with reverse-mode automatic differentiation.

Every op builds a new Tensor that remembers its parents and a local
gradient rule; `backward` replays the recorded graph in reverse
topological order, accumulating gradients additively into every tensor
that needs one. Storage and compute are float32 throughout; the
matching 64-bit finite-difference oracles live in the test suite.
"""

from __future__ import annotations

import numpy as np

DTYPE = np.float32
LOG_FLOOR = 1e-12


class ShapeError(ValueError):
    """Operand shapes violate the op's contract."""


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_grad_fn")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=DTYPE)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._grad_fn = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # Thin operator sugar over the functional API.
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __matmul__(self, other):
        return matmul(self, other)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _tracked(t: Tensor) -> bool:
    return t.requires_grad or t._grad_fn is not None


def _accum(t: Tensor, g: np.ndarray) -> None:
    if not _tracked(t):
        return
    if t.grad is None:
        # Copy: g may alias another node's grad buffer (e.g. reshape).
        t.grad = np.array(g, dtype=DTYPE, copy=True)
    else:
        t.grad = t.grad + g


def _make(data: np.ndarray, parents: tuple[Tensor, ...], grad_fn) -> Tensor:
    out = Tensor(data)
    if any(_tracked(p) for p in parents):
        out._parents = parents
        out._grad_fn = grad_fn
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum g down to `shape`, undoing numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, dim in enumerate(shape):
        if dim == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# arithmetic


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} @ {b.shape}")
    out_data = a.data @ b.data

    def rule(g):
        _accum(a, g @ b.data.T)
        _accum(b, a.data.T @ g)

    return _make(out_data, (a, b), rule)


def add(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data + b.data

    def rule(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))

    return _make(out_data, (a, b), rule)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data - b.data

    def rule(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(-g, b.shape))

    return _make(out_data, (a, b), rule)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data * b.data

    def rule(g):
        _accum(a, _unbroadcast(g * b.data, a.shape))
        _accum(b, _unbroadcast(g * a.data, b.shape))

    return _make(out_data, (a, b), rule)


def div(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data / b.data

    def rule(g):
        _accum(a, _unbroadcast(g / b.data, a.shape))
        _accum(b, _unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return _make(out_data, (a, b), rule)


def scale(x: Tensor, s: float) -> Tensor:
    s32 = DTYPE(s)
    out_data = x.data * s32

    def rule(g):
        _accum(x, g * s32)

    return _make(out_data, (x,), rule)


def neg(x: Tensor) -> Tensor:
    return scale(x, -1.0)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    if int(np.prod(shape)) != x.data.size:
        raise ShapeError(f"cannot reshape {x.shape} to {shape}")
    orig = x.shape
    out_data = x.data.reshape(shape)

    def rule(g):
        _accum(x, g.reshape(orig))

    return _make(out_data, (x,), rule)


# ---------------------------------------------------------------------------
# elementwise nonlinearities


def relu(x: Tensor) -> Tensor:
    out_data = np.maximum(x.data, 0)

    def rule(g):
        _accum(x, g * (x.data > 0))

    return _make(out_data, (x,), rule)


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    s32 = DTYPE(slope)
    out_data = np.where(x.data > 0, x.data, x.data * s32)

    def rule(g):
        _accum(x, g * np.where(x.data > 0, DTYPE(1.0), s32))

    return _make(out_data, (x,), rule)


def sigmoid(x: Tensor) -> Tensor:
    # exp of a non-positive argument only, so large |x| cannot overflow
    z = np.exp(-np.abs(x.data))
    out_data = np.where(x.data >= 0, DTYPE(1.0) / (DTYPE(1.0) + z), z / (DTYPE(1.0) + z))

    def rule(g):
        _accum(x, g * out_data * (DTYPE(1.0) - out_data))

    return _make(out_data, (x,), rule)


def tanh(x: Tensor) -> Tensor:
    out_data = np.tanh(x.data)

    def rule(g):
        _accum(x, g * (DTYPE(1.0) - out_data * out_data))

    return _make(out_data, (x,), rule)


def activation(x: Tensor, kind: str) -> Tensor:
    """Elementwise nonlinearity, kind in {relu, sigmoid, tanh}."""
    try:
        fn = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh}[kind]
    except KeyError:
        raise ValueError(f"unknown activation kind {kind!r}") from None
    return fn(x)


def exp(x: Tensor) -> Tensor:
    out_data = np.exp(x.data)

    def rule(g):
        _accum(x, g * out_data)

    return _make(out_data, (x,), rule)


def log(x: Tensor, floor: float = LOG_FLOOR) -> Tensor:
    """Natural log with the argument clamped below at `floor`."""
    clamped = np.maximum(x.data, DTYPE(floor))
    out_data = np.log(clamped)

    def rule(g):
        _accum(x, np.where(x.data > floor, g / clamped, DTYPE(0.0)))

    return _make(out_data, (x,), rule)


def clamp(x: Tensor, lo: float, hi: float) -> Tensor:
    out_data = np.clip(x.data, DTYPE(lo), DTYPE(hi))

    def rule(g):
        inside = (x.data >= lo) & (x.data <= hi)
        _accum(x, g * inside)

    return _make(out_data, (x,), rule)


def minimum(a: Tensor, b: Tensor) -> Tensor:
    out_data = np.minimum(a.data, b.data)

    def rule(g):
        take_a = a.data <= b.data
        _accum(a, _unbroadcast(g * take_a, a.shape))
        _accum(b, _unbroadcast(g * ~take_a, b.shape))

    return _make(out_data, (a, b), rule)


# ---------------------------------------------------------------------------
# reductions and distributions


def sum_all(x: Tensor) -> Tensor:
    out_data = np.asarray(x.data.sum(), dtype=DTYPE)

    def rule(g):
        _accum(x, np.broadcast_to(g, x.shape).astype(DTYPE, copy=False))

    return _make(out_data, (x,), rule)


def mean_rows(x: Tensor) -> Tensor:
    """(n, d) -> (d,), the mean over rows."""
    if x.data.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"mean_rows needs a nonempty 2-D tensor, got {x.shape}")
    n = x.shape[0]
    out_data = x.data.mean(axis=0)

    def rule(g):
        _accum(x, np.broadcast_to(g / DTYPE(n), x.shape).astype(DTYPE, copy=False))

    return _make(out_data, (x,), rule)


def softmax(x: Tensor) -> Tensor:
    """1-D softmax; the max is subtracted before exponentiation."""
    if x.data.ndim != 1 or x.shape[0] == 0:
        raise ShapeError(f"softmax needs a nonempty 1-D tensor, got {x.shape}")
    shifted = x.data - x.data.max()
    e = np.exp(shifted)
    out_data = e / e.sum()

    def rule(g):
        dot = (g * out_data).sum()
        _accum(x, out_data * (g - dot))

    return _make(out_data, (x,), rule)


def cross_entropy(pred: Tensor, target: Tensor, floor: float = LOG_FLOOR) -> Tensor:
    """-sum(target * log(pred)) for two 1-D distributions.

    The log argument is clamped below at `floor` so confident wrong
    predictions stay finite. Raises ValueError when either input is not
    a probability distribution.
    """
    if pred.data.ndim != 1 or pred.shape != target.shape:
        raise ShapeError(
            f"cross_entropy needs matching 1-D inputs, got {pred.shape} vs {target.shape}"
        )
    for name, t in (("pred", pred), ("target", target)):
        if t.data.min() < -1e-6:
            raise ValueError(f"cross_entropy {name} has negative entries")
        if abs(float(t.data.sum()) - 1.0) > 1e-5:
            raise ValueError(f"cross_entropy {name} does not sum to 1")
    clamped = np.maximum(pred.data, DTYPE(floor))
    log_p = np.log(clamped)
    out_data = np.asarray(-(target.data * log_p).sum(), dtype=DTYPE)

    def rule(g):
        mask = pred.data > floor
        _accum(pred, np.where(mask, -g * target.data / clamped, DTYPE(0.0)))
        _accum(target, -g * log_p)

    return _make(out_data, (pred, target), rule)


def entropy(p: Tensor) -> Tensor:
    """-sum(p * log p) of a 1-D distribution, differentiable in p."""
    return neg(sum_all(mul(p, log(p))))


# ---------------------------------------------------------------------------
# indexing and segment ops


def _check_index(idx: np.ndarray, n: int, what: str) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"{what} out of range [0, {n})")
    return idx


def gather_rows(x: Tensor, idx) -> Tensor:
    """Select rows (axis 0) of x by integer index, with scatter-add backward."""
    idx = _check_index(idx, x.shape[0], "gather index")
    out_data = x.data[idx]

    def rule(g):
        gx = np.zeros(x.shape, dtype=DTYPE)
        np.add.at(gx, idx, g)
        _accum(x, gx)

    return _make(out_data, (x,), rule)


def pick(x: Tensor, i: int) -> Tensor:
    """Scalar element x[i] of a 1-D tensor."""
    if x.data.ndim != 1:
        raise ShapeError(f"pick needs a 1-D tensor, got {x.shape}")
    if not 0 <= i < x.shape[0]:
        raise IndexError(f"pick index {i} out of range [0, {x.shape[0]})")
    out_data = np.asarray(x.data[i], dtype=DTYPE)

    def rule(g):
        gx = np.zeros(x.shape, dtype=DTYPE)
        gx[i] = g
        _accum(x, gx)

    return _make(out_data, (x,), rule)


def segment_sum(values: Tensor, segment_of, n_segments: int) -> Tensor:
    """Row-wise sum of `values` (E, d) grouped by segment id; empty segments are zero."""
    if values.data.ndim != 2:
        raise ShapeError(f"segment_sum needs a 2-D tensor, got {values.shape}")
    seg = _check_index(segment_of, n_segments, "segment id")
    if seg.shape != (values.shape[0],):
        raise ShapeError("segment_of length must match the number of rows")
    out_data = np.zeros((n_segments, values.shape[1]), dtype=DTYPE)
    np.add.at(out_data, seg, values.data)

    def rule(g):
        _accum(values, g[seg])

    return _make(out_data, (values,), rule)


def segment_mean(values: Tensor, segment_of, n_segments: int) -> Tensor:
    """Like segment_sum but averaged per segment; empty segments stay zero."""
    if values.data.ndim != 2:
        raise ShapeError(f"segment_mean needs a 2-D tensor, got {values.shape}")
    seg = _check_index(segment_of, n_segments, "segment id")
    if seg.shape != (values.shape[0],):
        raise ShapeError("segment_of length must match the number of rows")
    counts = np.bincount(seg, minlength=n_segments).astype(DTYPE)
    denom = np.maximum(counts, DTYPE(1.0))[:, None]
    out_data = np.zeros((n_segments, values.shape[1]), dtype=DTYPE)
    np.add.at(out_data, seg, values.data)
    out_data /= denom

    def rule(g):
        _accum(values, (g / denom)[seg])

    return _make(out_data, (values,), rule)


def segment_aggregate(values: Tensor, segment_of, n_segments: int, mode: str) -> Tensor:
    """Per-segment sum or mean of rows."""
    if mode == "sum":
        return segment_sum(values, segment_of, n_segments)
    if mode == "mean":
        return segment_mean(values, segment_of, n_segments)
    raise ValueError(f"unknown aggregation mode {mode!r}")


def segment_softmax(scores: Tensor, segment_of, n_segments: int) -> Tensor:
    """Softmax of 1-D scores within each segment (n,) -> (n,).

    The per-segment max is treated as a constant shift, which leaves the
    gradient exact while keeping the exponentials bounded.
    """
    if scores.data.ndim != 1:
        raise ShapeError(f"segment_softmax needs a 1-D tensor, got {scores.shape}")
    seg = _check_index(segment_of, n_segments, "segment id")
    seg_max = np.full(n_segments, -np.inf, dtype=DTYPE)
    np.maximum.at(seg_max, seg, scores.data)
    seg_max = np.where(np.isfinite(seg_max), seg_max, DTYPE(0.0))
    shifted = sub(scores, Tensor(seg_max[seg]))
    e = exp(shifted)
    denom = segment_sum(reshape(e, (scores.shape[0], 1)), seg, n_segments)
    denom_per_row = gather_rows(denom, seg)
    out = div(reshape(e, (scores.shape[0], 1)), denom_per_row)
    return reshape(out, (scores.shape[0],))


# ---------------------------------------------------------------------------
# backward pass


def _toposort(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor, params: tuple[Tensor, ...] | list[Tensor] = ()) -> None:
    """Populate grads of everything `loss` depends on.

    Any tensor in `params` that the loss does not reach gets a zero grad
    so optimizers can treat the parameter list uniformly.
    """
    if loss.data.shape != ():
        raise ValueError(f"backward needs a scalar loss, got shape {loss.data.shape}")
    order = _toposort(loss)
    _accum(loss, np.ones((), dtype=DTYPE))
    for node in reversed(order):
        if node._grad_fn is not None and node.grad is not None:
            node._grad_fn(node.grad)
    for p in params:
        if p.requires_grad and p.grad is None:
            p.grad = np.zeros(p.shape, dtype=DTYPE)


def zero_grad(params) -> None:
    for p in params:
        p.grad = None
