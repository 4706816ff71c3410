"""Dense float64 matrices with a reverse-mode gradient tape.

Everything is a 2-D array: scalars are (1, 1), vectors are columns (n, 1).
Primitives compute the forward value and, when a tape is supplied and any
input requires gradients, append a backward closure to the tape.  Broadcasting
is restricted to a (1, c) row against an (n, c) matrix; any other shape mixing
raises ShapeMismatch.
"""

from __future__ import annotations

import numpy as np

from .errors import DisconnectedLoss, NonFinite, ShapeMismatch


class Tensor:
    """A 2-D float64 value, optionally carrying a gradient buffer."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeMismatch(f"tensors are 2-D, got shape {arr.shape}")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def grad_array(self) -> np.ndarray:
        """Gradient buffer, or zeros if no gradient ever reached this tensor."""
        if self.grad is None:
            return np.zeros_like(self.data)
        return self.grad

    def zero_grad(self) -> None:
        self.grad = None

    def copy(self) -> "Tensor":
        t = Tensor(self.data.copy(), self.requires_grad)
        return t

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class Tape:
    """Ordered record of primitive applications, inputs before outputs."""

    def __init__(self):
        self._records: list[tuple[Tensor, object]] = []

    def record(self, out: Tensor, backward_fn) -> None:
        self._records.append((out, backward_fn))

    def __len__(self) -> int:
        return len(self._records)

    def outputs(self):
        return [out for out, _ in self._records]

    def run_backward(self, loss: Tensor) -> None:
        backward(self, loss)


def _check_finite(arr: np.ndarray, op: str) -> None:
    if not np.isfinite(arr).all():
        raise NonFinite(f"non-finite values produced by {op}")


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    # own the buffer so later += never aliases a caller's array
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64)
    else:
        t.grad += g


def _result(tape, inputs, data: np.ndarray, op: str, backward_fn) -> Tensor:
    _check_finite(data, op)
    needs = any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=needs)
    if tape is not None and needs:
        tape.record(out, backward_fn(out))
    return out


def _broadcast_ok(a: Tensor, b: Tensor) -> None:
    if a.shape == b.shape:
        return
    if a.shape[0] == 1 and a.shape[1] == b.shape[1]:
        return
    if b.shape[0] == 1 and b.shape[1] == a.shape[1]:
        return
    raise ShapeMismatch(f"incompatible shapes {a.shape} and {b.shape}")


def _reduce_to(g: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    # undo row-broadcast: collapse rows when the input was (1, c)
    if g.shape == shape:
        return g
    return g.sum(axis=0, keepdims=True)


# -- elementwise and linear primitives ---------------------------------------


def add(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    _broadcast_ok(a, b)

    def bk(out):
        def fn(g):
            if a.requires_grad:
                _accumulate(a, _reduce_to(g, a.shape))
            if b.requires_grad:
                _accumulate(b, _reduce_to(g, b.shape))
        return fn

    return _result(tape, (a, b), a.data + b.data, "add", bk)


def sub(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    _broadcast_ok(a, b)

    def bk(out):
        def fn(g):
            if a.requires_grad:
                _accumulate(a, _reduce_to(g, a.shape))
            if b.requires_grad:
                _accumulate(b, -_reduce_to(g, b.shape))
        return fn

    return _result(tape, (a, b), a.data - b.data, "sub", bk)


def hadamard(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    _broadcast_ok(a, b)

    def bk(out):
        def fn(g):
            if a.requires_grad:
                _accumulate(a, _reduce_to(g * b.data, a.shape))
            if b.requires_grad:
                _accumulate(b, _reduce_to(g * a.data, b.shape))
        return fn

    return _result(tape, (a, b), a.data * b.data, "hadamard", bk)


def matmul(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul {a.shape} @ {b.shape}")

    def bk(out):
        def fn(g):
            if a.requires_grad:
                _accumulate(a, g @ b.data.T)
            if b.requires_grad:
                _accumulate(b, a.data.T @ g)
        return fn

    return _result(tape, (a, b), a.data @ b.data, "matmul", bk)


def scalar_mul(x: Tensor, c: float, tape: Tape | None = None) -> Tensor:
    c = float(c)

    def bk(out):
        def fn(g):
            _accumulate(x, g * c)
        return fn

    return _result(tape, (x,), x.data * c, "scalar_mul", bk)


def neg(x: Tensor, tape: Tape | None = None) -> Tensor:
    def bk(out):
        def fn(g):
            _accumulate(x, -g)
        return fn

    return _result(tape, (x,), -x.data, "neg", bk)


def sigmoid(x: Tensor, tape: Tape | None = None) -> Tensor:
    v = x.data
    out_data = np.empty_like(v)
    pos = v >= 0
    out_data[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ex = np.exp(v[~pos])
    out_data[~pos] = ex / (1.0 + ex)

    def bk(out):
        def fn(g):
            _accumulate(x, g * out.data * (1.0 - out.data))
        return fn

    return _result(tape, (x,), out_data, "sigmoid", bk)


def relu(x: Tensor, tape: Tape | None = None) -> Tensor:
    def bk(out):
        def fn(g):
            _accumulate(x, g * (x.data > 0))
        return fn

    return _result(tape, (x,), np.maximum(x.data, 0.0), "relu", bk)


def leaky_relu(x: Tensor, slope: float = 0.2, tape: Tape | None = None) -> Tensor:
    slope = float(slope)

    def bk(out):
        def fn(g):
            _accumulate(x, g * np.where(x.data > 0, 1.0, slope))
        return fn

    return _result(tape, (x,), np.where(x.data > 0, x.data, slope * x.data), "leaky_relu", bk)


def exp(x: Tensor, tape: Tape | None = None) -> Tensor:
    def bk(out):
        def fn(g):
            _accumulate(x, g * out.data)
        return fn

    return _result(tape, (x,), np.exp(x.data), "exp", bk)


def log(x: Tensor, tape: Tape | None = None) -> Tensor:
    if np.any(x.data <= 0):
        raise NonFinite("log of non-positive value")

    def bk(out):
        def fn(g):
            _accumulate(x, g / x.data)
        return fn

    return _result(tape, (x,), np.log(x.data), "log", bk)


def clamp(x: Tensor, lo: float, hi: float, tape: Tape | None = None) -> Tensor:
    """Elementwise clip; gradient is 1 where the value passed through, else 0."""
    lo, hi = float(lo), float(hi)

    def bk(out):
        def fn(g):
            inside = (x.data >= lo) & (x.data <= hi)
            _accumulate(x, g * inside)
        return fn

    return _result(tape, (x,), np.clip(x.data, lo, hi), "clamp", bk)


def tensor_sum(x: Tensor, tape: Tape | None = None) -> Tensor:
    def bk(out):
        def fn(g):
            _accumulate(x, np.full_like(x.data, g[0, 0]))
        return fn

    return _result(tape, (x,), np.array([[x.data.sum()]]), "sum", bk)


def concat_cols(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.shape[0] != b.shape[0]:
        raise ShapeMismatch(f"concat_cols {a.shape} | {b.shape}")
    split = a.shape[1]

    def bk(out):
        def fn(g):
            if a.requires_grad:
                _accumulate(a, g[:, :split])
            if b.requires_grad:
                _accumulate(b, g[:, split:])
        return fn

    return _result(tape, (a, b), np.hstack([a.data, b.data]), "concat_cols", bk)


def gather_rows(x: Tensor, indices, tape: Tape | None = None) -> Tensor:
    """Select rows of x by index; backward scatter-adds into the source rows."""
    idx = np.asarray(indices, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeMismatch("gather_rows wants a flat index list")
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise ShapeMismatch("gather_rows index out of range")

    def bk(out):
        def fn(g):
            gx = np.zeros_like(x.data)
            np.add.at(gx, idx, g)
            _accumulate(x, gx)
        return fn

    return _result(tape, (x,), x.data[idx], "gather_rows", bk)


# -- segment operations -------------------------------------------------------


def _segment_layout(segment_ids: np.ndarray, m: int):
    seg = np.asarray(segment_ids, dtype=np.intp)
    if seg.ndim != 1 or seg.size != m:
        raise ShapeMismatch("segment ids must be one per row")
    if m and np.any(np.diff(seg) < 0):
        raise ShapeMismatch("segment ids must be sorted ascending")
    starts = np.r_[0, np.flatnonzero(np.diff(seg)) + 1] if m else np.empty(0, dtype=np.intp)
    counts = np.diff(np.r_[starts, m]) if m else np.empty(0, dtype=np.intp)
    return seg, starts, counts


def segment_sum(values: Tensor, segment_ids, n_segments: int, tape: Tape | None = None) -> Tensor:
    m, c = values.shape
    seg, starts, _ = _segment_layout(segment_ids, m)
    if m and seg[-1] >= n_segments:
        raise ShapeMismatch("segment id exceeds n_segments")
    out_data = np.zeros((n_segments, c))
    if m:
        out_data[seg[starts]] = np.add.reduceat(values.data, starts, axis=0)

    def bk(out):
        def fn(g):
            _accumulate(values, g[seg])
        return fn

    return _result(tape, (values,), out_data, "segment_sum", bk)


def segment_softmax(scores: Tensor, segment_ids, tape: Tape | None = None) -> Tensor:
    """Column-wise softmax within each contiguous segment of rows.

    Rows in a segment get positive weights summing to 1 per column; an empty
    input yields an empty output.  Shifted by the per-segment max before
    exponentiation for stability.
    """
    m, c = scores.shape
    seg, starts, counts = _segment_layout(segment_ids, m)
    if m == 0:
        out_data = np.zeros((0, c))
    else:
        maxes = np.maximum.reduceat(scores.data, starts, axis=0)
        shifted = scores.data - np.repeat(maxes, counts, axis=0)
        e = np.exp(shifted)
        sums = np.add.reduceat(e, starts, axis=0)
        out_data = e / np.repeat(sums, counts, axis=0)

    def bk(out):
        def fn(g):
            if m == 0:
                return
            dot = np.add.reduceat(out.data * g, starts, axis=0)
            _accumulate(scores, out.data * (g - np.repeat(dot, counts, axis=0)))
        return fn

    return _result(tape, (scores,), out_data, "segment_softmax", bk)


# -- backward pass ------------------------------------------------------------


def backward(tape: Tape, loss: Tensor) -> None:
    """Populate .grad on every tensor the loss depends on, reverse order."""
    if loss.shape != (1, 1):
        raise ShapeMismatch("loss must be a 1x1 tensor")
    if not any(out is loss for out in tape.outputs()):
        raise DisconnectedLoss("loss was not produced on this tape")
    loss.grad = np.ones((1, 1))
    for out, fn in reversed(tape._records):
        if out.grad is None:
            continue
        fn(out.grad)


# -- verification and initialization ------------------------------------------


def grad_check(f, x: Tensor, eps: float = 1e-6) -> float:
    """Max relative error between reverse-mode and central finite differences.

    f(x, tape) must return a (1, 1) tensor; it is re-evaluated with tape=None
    at perturbed points.  Error per coordinate is |g_ad - g_fd| / max(1, |g_fd|).
    """
    x.zero_grad()
    tape = Tape()
    out = f(x, tape)
    backward(tape, out)
    g_ad = x.grad_array().copy()

    g_fd = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(f(x, None).data[0, 0])
        flat[i] = orig - eps
        lo = float(f(x, None).data[0, 0])
        flat[i] = orig
        g_fd.reshape(-1)[i] = (hi - lo) / (2.0 * eps)

    denom = np.maximum(1.0, np.abs(g_fd))
    return float(np.max(np.abs(g_ad - g_fd) / denom))


def glorot_init(shape: tuple[int, int], seed: int) -> Tensor:
    """Uniform Glorot tensor from a seeded PCG64 stream; same seed, same bits."""
    rows, cols = shape
    if rows < 1 or cols < 1:
        raise ShapeMismatch(f"invalid init shape {shape}")
    bound = np.sqrt(6.0 / (rows + cols))
    rng = np.random.Generator(np.random.PCG64(seed))
    return Tensor(rng.uniform(-bound, bound, size=(rows, cols)), requires_grad=True)
