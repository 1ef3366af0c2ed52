"""Dense 2-D tensors with tape-based reverse-mode differentiation.

Everything is float64 and strictly two-dimensional. Operations take an
optional `Tape`; when one is passed the operation records a backward
rule on it, and `backward(loss, tape)` replays the tape in reverse to
accumulate d(loss)/d(tensor) into each participating tensor's `grad`.
A tape belongs to a single forward pass: rebuild it every time.

Gradients accumulate across `backward` calls (call `zero_grad` between
steps). Tensors that never touched the tape keep a zero (None) grad.
"""

from __future__ import annotations

import math

import numpy as np


class ShapeError(ValueError):
    """Operand shapes do not satisfy an operation's precondition."""


class ContractError(ValueError):
    """An argument violates an operation's contract."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""


class Tensor:
    """A rows x cols matrix of float64 with an optional gradient slot."""

    __slots__ = ("rows", "cols", "data", "grad")

    def __init__(self, rows: int, cols: int, data=None):
        if rows < 1 or cols < 1:
            raise ShapeError(f"tensor dimensions must be positive, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = np.zeros((rows, cols), dtype=np.float64)
        else:
            # always copy so the tensor never aliases caller memory
            arr = np.array(data, dtype=np.float64).reshape(rows, cols)
            self.data = np.ascontiguousarray(arr)
        self.grad = None

    @classmethod
    def from_array(cls, arr) -> "Tensor":
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2:
            raise ShapeError(f"expected a 1-D or 2-D array, got ndim={a.ndim}")
        return cls(a.shape[0], a.shape[1], a)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def zero_grad(self) -> None:
        self.grad = np.zeros((self.rows, self.cols), dtype=np.float64)

    def item(self) -> float:
        if self.rows != 1 or self.cols != 1:
            raise ShapeError(f"item() needs a 1x1 tensor, got {self.rows}x{self.cols}")
        return float(self.data[0, 0])

    def copy(self) -> "Tensor":
        return Tensor(self.rows, self.cols, self.data.copy())

    def __repr__(self):
        return f"Tensor({self.rows}x{self.cols})"


class Tape:
    """Ordered record of operations; replayed in reverse by `backward`."""

    __slots__ = ("_ops",)

    def __init__(self):
        self._ops = []

    def record(self, out: Tensor, inputs: tuple, vjp) -> None:
        """vjp(g) returns one gradient array (or None) per input."""
        self._ops.append((out, inputs, vjp))

    def __len__(self):
        return len(self._ops)


def _accumulate_grad(tensor: Tensor, g: np.ndarray) -> None:
    if tensor.grad is None:
        tensor.grad = g.copy()
    else:
        tensor.grad = tensor.grad + g


def backward(loss: Tensor, tape: Tape) -> None:
    """Accumulate d(loss)/d(t) into t.grad for every tensor on the tape.

    Adjoints are kept per-call, so calling twice without zeroing grads
    adds the same gradients again (exactly 2x after two calls).
    """
    if loss.rows != 1 or loss.cols != 1:
        raise ContractError(f"loss must be 1x1, got {loss.rows}x{loss.cols}")
    adjoints = {id(loss): np.ones((1, 1), dtype=np.float64)}
    tensors = {id(loss): loss}
    for out, inputs, vjp in reversed(tape._ops):
        g = adjoints.get(id(out))
        if g is None:
            continue
        for tensor, gi in zip(inputs, vjp(g)):
            if gi is None:
                continue
            key = id(tensor)
            tensors[key] = tensor
            prev = adjoints.get(key)
            adjoints[key] = gi if prev is None else prev + gi
    for key, tensor in tensors.items():
        _accumulate_grad(tensor, adjoints[key])


# ---------------------------------------------------------------------------
# operations


def matmul(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """Matrix product a @ b."""
    if a.cols != b.rows:
        raise ShapeError(f"matmul shape mismatch: {a.rows}x{a.cols} @ {b.rows}x{b.cols}")
    out = Tensor(a.rows, b.cols, a.data @ b.data)
    if tape is not None:
        a_data, b_data = a.data, b.data

        def vjp(g):
            return (g @ b_data.T, a_data.T @ g)

        tape.record(out, (a, b), vjp)
    return out


def add(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """Elementwise sum; b may be a 1 x cols row vector broadcast over a's rows."""
    broadcast = b.rows == 1 and a.rows != 1 and b.cols == a.cols
    if not broadcast and (a.rows != b.rows or a.cols != b.cols):
        raise ShapeError(f"add shape mismatch: {a.rows}x{a.cols} + {b.rows}x{b.cols}")
    out = Tensor(a.rows, a.cols, a.data + b.data)
    if tape is not None:

        def vjp(g):
            gb = g.sum(axis=0, keepdims=True) if broadcast else g
            return (g, gb)

        tape.record(out, (a, b), vjp)
    return out


def sub(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """Elementwise difference a - b (same shape)."""
    if a.rows != b.rows or a.cols != b.cols:
        raise ShapeError(f"sub shape mismatch: {a.rows}x{a.cols} - {b.rows}x{b.cols}")
    out = Tensor(a.rows, a.cols, a.data - b.data)
    if tape is not None:
        tape.record(out, (a, b), lambda g: (g, -g))
    return out


def mul(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """Elementwise (Hadamard) product, same shape."""
    if a.rows != b.rows or a.cols != b.cols:
        raise ShapeError(f"mul shape mismatch: {a.rows}x{a.cols} * {b.rows}x{b.cols}")
    out = Tensor(a.rows, a.cols, a.data * b.data)
    if tape is not None:
        a_data, b_data = a.data, b.data
        tape.record(out, (a, b), lambda g: (g * b_data, g * a_data))
    return out


def hadamard_const(x: Tensor, const, tape: Tape | None = None) -> Tensor:
    """Elementwise product with a constant array (no gradient into the constant)."""
    c = np.asarray(const, dtype=np.float64)
    if c.shape != (x.rows, x.cols):
        raise ShapeError(f"constant shape {c.shape} != tensor shape {x.shape}")
    out = Tensor(x.rows, x.cols, x.data * c)
    if tape is not None:
        tape.record(out, (x,), lambda g: (g * c,))
    return out


def add_const(x: Tensor, const, tape: Tape | None = None) -> Tensor:
    """Elementwise sum with a constant array (no gradient into the constant)."""
    c = np.asarray(const, dtype=np.float64)
    if c.shape != (x.rows, x.cols):
        raise ShapeError(f"constant shape {c.shape} != tensor shape {x.shape}")
    out = Tensor(x.rows, x.cols, x.data + c)
    if tape is not None:
        tape.record(out, (x,), lambda g: (g,))
    return out


ACTIVATIONS = ("relu", "tanh", "identity")


def activation(x: Tensor, kind: str, tape: Tape | None = None) -> Tensor:
    """Elementwise activation. The relu derivative at exactly 0 is 0."""
    if kind == "relu":
        y = np.maximum(x.data, 0.0)
        local = (x.data > 0.0).astype(np.float64)
    elif kind == "tanh":
        y = np.tanh(x.data)
        local = 1.0 - y * y
    elif kind == "identity":
        y = x.data.copy()
        local = None
    else:
        raise ContractError(f"unknown activation kind: {kind!r}")
    out = Tensor(x.rows, x.cols, y)
    if tape is not None:
        if local is None:
            tape.record(out, (x,), lambda g: (g,))
        else:
            tape.record(out, (x,), lambda g: (g * local,))
    return out


def concat_cols(parts: list[Tensor], tape: Tape | None = None) -> Tensor:
    """Horizontal concatenation of tensors with equal row counts."""
    if not parts:
        raise ContractError("concat_cols needs at least one tensor")
    rows = parts[0].rows
    for p in parts:
        if p.rows != rows:
            raise ShapeError("concat_cols row mismatch: " + ", ".join(f"{p.rows}x{p.cols}" for p in parts))
    out = Tensor(rows, sum(p.cols for p in parts), np.hstack([p.data for p in parts]))
    if tape is not None:
        widths = [p.cols for p in parts]

        def vjp(g):
            grads = []
            start = 0
            for w in widths:
                grads.append(g[:, start:start + w])
                start += w
            return tuple(grads)

        tape.record(out, tuple(parts), vjp)
    return out


def mean_all(x: Tensor, tape: Tape | None = None) -> Tensor:
    """Mean of all entries, as a 1x1 tensor."""
    size = x.rows * x.cols
    out = Tensor(1, 1, np.array([[x.data.mean()]]))
    if tape is not None:
        shape = (x.rows, x.cols)
        tape.record(out, (x,), lambda g: (np.full(shape, g[0, 0] / size),))
    return out


# ---------------------------------------------------------------------------
# validation


def gradient_check(f, params: list[Tensor], eps: float = 1e-5) -> float:
    """Compare tape gradients against central finite differences.

    `f` is a zero-argument callable returning a (loss, tape) pair built
    from the current values of `params`. Returns the max over all
    parameter entries of |analytic - numeric| / max(1, |analytic|, |numeric|).
    """
    if eps <= 0:
        raise ContractError("eps must be positive")

    def eval_loss() -> float:
        loss, _ = f()
        v = loss.item()
        if not math.isfinite(v):
            raise NumericError("loss is not finite")
        return v

    for p in params:
        p.zero_grad()
    loss, tape = f()
    if not math.isfinite(loss.item()):
        raise NumericError("loss is not finite")
    backward(loss, tape)

    worst = 0.0
    for p in params:
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + eps
            up = eval_loss()
            flat[i] = saved - eps
            down = eval_loss()
            flat[i] = saved
            numeric = (up - down) / (2.0 * eps)
            a = analytic.reshape(-1)[i]
            err = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            worst = max(worst, err)
    return worst
