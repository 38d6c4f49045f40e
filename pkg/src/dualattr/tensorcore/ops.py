"""Differentiable primitives.

The set covers what embeddings, LSTM cells, small feed-forward heads,
softmax attention, and cross-entropy losses need, and nothing more.
Shapes are vectors and matrices; the only broadcasts are the ones the
model uses (bias rows, scalars, and per-row scaling).

Every primitive is registered under a string kind so ``apply`` can
dispatch generically, which the tests use to exercise the shared error
contracts.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, ShapeError
from .tensor import Node, Tensor, active_graph

# Probabilities are clamped before any log: the cross-entropy losses are
# undefined at exactly 0 and 1.
CLAMP = 1e-7

_PRIMITIVES: dict[str, object] = {}


def _primitive(name):
    def register(fn):
        _PRIMITIVES[name] = fn
        return fn

    return register


def apply(kind: str, *inputs):
    """Apply a primitive by name. Unknown kinds raise ContractError."""
    fn = _PRIMITIVES.get(kind)
    if fn is None:
        raise ContractError(f"unknown primitive kind {kind!r}")
    return fn(*inputs)


def _values(x) -> np.ndarray:
    if isinstance(x, Tensor):
        return x.values
    return np.asarray(x, dtype=np.float64)


def _record(kind, inputs, out_values, grad_fn) -> Tensor:
    graph = active_graph()
    needs = graph is not None and any(
        isinstance(t, Tensor) and t.requires_grad for t in inputs
    )
    out = Tensor._wrap(np.asarray(out_values, dtype=np.float64), needs)
    if needs:
        graph._append(Node(kind, inputs, out, grad_fn))
    return out


@_primitive("matmul")
def matmul(a, b) -> Tensor:
    av, bv = _values(a), _values(b)
    if av.ndim == 2 and bv.ndim == 2:
        if av.shape[1] != bv.shape[0]:
            raise ShapeError(f"matmul: inner dims differ, {av.shape} @ {bv.shape}")
        out = av @ bv

        def grad_fn(g):
            return g @ bv.T, av.T @ g

    elif av.ndim == 2 and bv.ndim == 1:
        if av.shape[1] != bv.shape[0]:
            raise ShapeError(f"matmul: inner dims differ, {av.shape} @ {bv.shape}")
        out = av @ bv

        def grad_fn(g):
            return np.outer(g, bv), av.T @ g

    elif av.ndim == 1 and bv.ndim == 2:
        if av.shape[0] != bv.shape[0]:
            raise ShapeError(f"matmul: inner dims differ, {av.shape} @ {bv.shape}")
        out = av @ bv

        def grad_fn(g):
            return bv @ g, np.outer(av, g)

    elif av.ndim == 1 and bv.ndim == 1:
        if av.shape[0] != bv.shape[0]:
            raise ShapeError(f"matmul: inner dims differ, {av.shape} @ {bv.shape}")
        out = av @ bv

        def grad_fn(g):
            return g * bv, g * av

    else:
        raise ShapeError(f"matmul: unsupported ranks {av.shape} @ {bv.shape}")
    return _record("matmul", (a, b), out, grad_fn)


@_primitive("add")
def add(a, b) -> Tensor:
    av, bv = _values(a), _values(b)
    if av.shape == bv.shape:

        def grad_fn(g):
            return g, g

    elif bv.ndim == 0:

        def grad_fn(g):
            return g, g.sum()

    elif av.ndim == 2 and bv.ndim == 1 and av.shape[1] == bv.shape[0]:
        # bias row broadcast over the batch dimension
        def grad_fn(g):
            return g, g.sum(axis=0)

    else:
        raise ShapeError(f"add: incompatible shapes {av.shape} + {bv.shape}")
    return _record("add", (a, b), av + bv, grad_fn)


@_primitive("mul")
def mul(a, b) -> Tensor:
    av, bv = _values(a), _values(b)
    if av.shape != bv.shape:
        raise ShapeError(f"mul: shapes differ, {av.shape} * {bv.shape}")

    def grad_fn(g):
        return g * bv, g * av

    return _record("mul", (a, b), av * bv, grad_fn)


@_primitive("colmul")
def colmul(s, m) -> Tensor:
    """Scale each row of matrix ``m`` by the matching entry of vector ``s``."""
    sv, mv = _values(s), _values(m)
    if sv.ndim != 1 or mv.ndim != 2 or sv.shape[0] != mv.shape[0]:
        raise ShapeError(f"colmul: need (B,) and (B,k), got {sv.shape} and {mv.shape}")

    def grad_fn(g):
        return (g * mv).sum(axis=1), g * sv[:, None]

    return _record("colmul", (s, m), mv * sv[:, None], grad_fn)


@_primitive("affine")
def affine(x, alpha: float, beta: float) -> Tensor:
    xv = _values(x)
    a = float(alpha)

    def grad_fn(g):
        return (a * g, None, None)

    return _record("affine", (x, alpha, beta), a * xv + float(beta), grad_fn)


@_primitive("concat")
def concat(parts, axis: int = 0) -> Tensor:
    vals = [_values(p) for p in parts]
    if not vals:
        raise ShapeError("concat: empty input list")
    ndim = vals[0].ndim
    if any(v.ndim != ndim for v in vals) or axis not in (0, 1) or axis >= ndim:
        raise ShapeError(f"concat: bad shapes {[v.shape for v in vals]} on axis {axis}")
    sizes = [v.shape[axis] for v in vals]
    offsets = np.cumsum([0] + sizes)

    def grad_fn(g):
        if axis == 0:
            return tuple(g[offsets[i] : offsets[i + 1]] for i in range(len(vals)))
        return tuple(g[:, offsets[i] : offsets[i + 1]] for i in range(len(vals)))

    return _record("concat", tuple(parts), np.concatenate(vals, axis=axis), grad_fn)


@_primitive("stack_cols")
def stack_cols(parts) -> Tensor:
    """Stack m vectors of shape (B,) into a (B, m) matrix."""
    vals = [_values(p) for p in parts]
    if not vals or any(v.ndim != 1 or v.shape != vals[0].shape for v in vals):
        raise ShapeError(f"stack_cols: need same-length vectors, got {[v.shape for v in vals]}")

    def grad_fn(g):
        return tuple(g[:, j] for j in range(len(vals)))

    return _record("stack_cols", tuple(parts), np.stack(vals, axis=1), grad_fn)


@_primitive("pick_col")
def pick_col(m, j: int) -> Tensor:
    mv = _values(m)
    if mv.ndim != 2 or not 0 <= j < mv.shape[1]:
        raise ShapeError(f"pick_col: column {j} of shape {mv.shape}")

    def grad_fn(g):
        full = np.zeros_like(mv)
        full[:, j] = g
        return (full, None)

    return _record("pick_col", (m, j), mv[:, j].copy(), grad_fn)


@_primitive("lookup")
def lookup(table, indices) -> Tensor:
    """Row lookup into a 2-D table; gradients scatter-add into the rows."""
    tv = _values(table)
    if tv.ndim != 2:
        raise ShapeError(f"lookup: table must be 2-D, got {tv.shape}")
    idx = np.asarray(indices)
    if not np.issubdtype(idx.dtype, np.integer) or idx.ndim > 1:
        raise ShapeError(f"lookup: indices must be an int scalar or vector, got {idx.dtype} {idx.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= tv.shape[0]):
        raise IndexError(f"lookup: index out of range for table with {tv.shape[0]} rows")

    def grad_fn(g):
        dt = np.zeros_like(tv)
        np.add.at(dt, idx, g)
        return (dt, None)

    return _record("lookup", (table, indices), tv[idx], grad_fn)


@_primitive("reshape")
def reshape(x, shape) -> Tensor:
    xv = _values(x)
    if int(np.prod(shape)) != xv.size:
        raise ShapeError(f"reshape: cannot view {xv.shape} as {tuple(shape)}")
    in_shape = xv.shape

    def grad_fn(g):
        return (g.reshape(in_shape), None)

    return _record("reshape", (x, shape), xv.reshape(shape), grad_fn)


@_primitive("sigmoid")
def sigmoid(x) -> Tensor:
    xv = _values(x)
    ex = np.exp(-np.abs(xv))
    out = np.where(xv >= 0, 1.0 / (1.0 + ex), ex / (1.0 + ex))

    def grad_fn(g):
        return (g * out * (1.0 - out),)

    return _record("sigmoid", (x,), out, grad_fn)


@_primitive("tanh")
def tanh(x) -> Tensor:
    out = np.tanh(_values(x))

    def grad_fn(g):
        return (g * (1.0 - out * out),)

    return _record("tanh", (x,), out, grad_fn)


@_primitive("softmax")
def softmax(x) -> Tensor:
    """Softmax over the last axis, computed with max-subtraction."""
    xv = _values(x)
    if xv.ndim not in (1, 2):
        raise ShapeError(f"softmax: need a vector or matrix, got {xv.shape}")
    shifted = xv - xv.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    out = ex / ex.sum(axis=-1, keepdims=True)

    def grad_fn(g):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return _record("softmax", (x,), out, grad_fn)


@_primitive("sum")
def sum(x) -> Tensor:  # noqa: A001 - deliberate, used as ops.sum
    xv = _values(x)

    def grad_fn(g):
        return (np.full_like(xv, float(g)),)

    return _record("sum", (x,), xv.sum(), grad_fn)


@_primitive("mean")
def mean(x) -> Tensor:
    xv = _values(x)
    n = xv.size

    def grad_fn(g):
        return (np.full_like(xv, float(g) / n),)

    return _record("mean", (x,), xv.mean(), grad_fn)


@_primitive("bce")
def bce(pred, target) -> Tensor:
    """Elementwise binary cross-entropy with probability clamping.

    ``target`` is data, never differentiated. Gradients vanish where the
    prediction sits outside the clamp window, matching the clipped
    forward value.
    """
    pv, tv = _values(pred), _values(target)
    if pv.shape != tv.shape:
        raise ShapeError(f"bce: shapes differ, {pv.shape} vs {tv.shape}")
    p = np.clip(pv, CLAMP, 1.0 - CLAMP)
    out = -tv * np.log(p) - (1.0 - tv) * np.log(1.0 - p)

    def grad_fn(g):
        inside = (pv > CLAMP) & (pv < 1.0 - CLAMP)
        return (np.where(inside, g * (p - tv) / (p * (1.0 - p)), 0.0), None)

    return _record("bce", (pred, target), out, grad_fn)
