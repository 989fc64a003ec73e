"""Reverse-mode automatic differentiation over dense float64 arrays.

Every operation builds a `Tensor` node holding its value, the parent nodes it
was computed from, and a closure that routes the output gradient into the
parents.  `backward()` on a scalar runs the closures in reverse topological
order.  Only the ops the model needs are provided; all of them are exercised
by finite-difference tests.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError


class Tensor:
    __slots__ = ("value", "grad", "parents", "_backward", "requires_grad", "name")

    def __init__(self, value, parents=(), backward=None, requires_grad=False, name=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = tuple(p for p in parents if p.requires_grad)
        self._backward = backward
        self.requires_grad = requires_grad or bool(self.parents)
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    def zero_grad(self):
        self.grad = None

    def backward(self):
        if self.value.shape != ():
            raise ShapeMismatchError("backward() requires a scalar loss")
        order = _topo_order(self)
        self._accumulate(np.asarray(1.0))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self):
        return f"Tensor(shape={self.value.shape}, requires_grad={self.requires_grad})"


def _topo_order(root: Tensor) -> list[Tensor]:
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
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def tensor(value) -> Tensor:
    """Constant (non-trainable) tensor."""
    return Tensor(value)


def param(value, name=None) -> Tensor:
    """Trainable leaf tensor."""
    return Tensor(value, requires_grad=True, name=name)


def _check(cond, msg):
    if not cond:
        raise ShapeMismatchError(msg)


# --- arithmetic ---


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise addition; also supports matrix + 1-D row bias."""
    av, bv = a.value, b.value
    if av.shape == bv.shape:
        out = Tensor(av + bv, (a, b))

        def bw(g):
            if a.requires_grad:
                a._accumulate(g)
            if b.requires_grad:
                b._accumulate(g)

    elif av.ndim == 2 and bv.ndim == 1 and av.shape[1] == bv.shape[0]:
        out = Tensor(av + bv[None, :], (a, b))

        def bw(g):
            if a.requires_grad:
                a._accumulate(g)
            if b.requires_grad:
                b._accumulate(g.sum(axis=0))

    else:
        raise ShapeMismatchError(f"add: {av.shape} vs {bv.shape}")
    out._backward = bw
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check(a.value.shape == b.value.shape, f"mul: {a.shape} vs {b.shape}")
    out = Tensor(a.value * b.value, (a, b))

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * b.value)
        if b.requires_grad:
            b._accumulate(g * a.value)

    out._backward = bw
    return out


def mul_col(a: Tensor, col: Tensor) -> Tensor:
    """Scale each row i of 2-D `a` by scalar col[i] (col is 1-D)."""
    _check(
        a.value.ndim == 2 and col.value.ndim == 1 and a.value.shape[0] == col.value.shape[0],
        f"mul_col: {a.shape} vs {col.shape}",
    )
    out = Tensor(a.value * col.value[:, None], (a, col))

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * col.value[:, None])
        if col.requires_grad:
            col._accumulate((g * a.value).sum(axis=1))

    out._backward = bw
    return out


def scale(a: Tensor, k: float) -> Tensor:
    out = Tensor(a.value * k, (a,))
    out._backward = lambda g: a._accumulate(g * k) if a.requires_grad else None
    return out


def add_const(a: Tensor, k: float) -> Tensor:
    out = Tensor(a.value + k, (a,))
    out._backward = lambda g: a._accumulate(g) if a.requires_grad else None
    return out


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _check(
        a.value.ndim == 2 and b.value.ndim == 2 and a.value.shape[1] == b.value.shape[0],
        f"matmul: {a.shape} @ {b.shape}",
    )
    out = Tensor(a.value @ b.value, (a, b))

    def bw(g):
        if a.requires_grad:
            a._accumulate(g @ b.value.T)
        if b.requires_grad:
            b._accumulate(a.value.T @ g)

    out._backward = bw
    return out


def mv(a: Tensor, v: Tensor) -> Tensor:
    """2-D × 1-D → 1-D."""
    _check(
        a.value.ndim == 2 and v.value.ndim == 1 and a.value.shape[1] == v.value.shape[0],
        f"mv: {a.shape} @ {v.shape}",
    )
    out = Tensor(a.value @ v.value, (a, v))

    def bw(g):
        if a.requires_grad:
            a._accumulate(np.outer(g, v.value))
        if v.requires_grad:
            v._accumulate(a.value.T @ g)

    out._backward = bw
    return out


def transpose(a: Tensor) -> Tensor:
    _check(a.value.ndim == 2, f"transpose: {a.shape}")
    out = Tensor(a.value.T, (a,))
    out._backward = lambda g: a._accumulate(g.T) if a.requires_grad else None
    return out


# --- nonlinearities ---


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.value)
    out = Tensor(y, (a,))
    out._backward = lambda g: a._accumulate(g * (1.0 - y * y)) if a.requires_grad else None
    return out


def sigmoid(a: Tensor) -> Tensor:
    y = 0.5 * (1.0 + np.tanh(0.5 * a.value))  # numerically stable logistic
    out = Tensor(y, (a,))
    out._backward = lambda g: a._accumulate(g * y * (1.0 - y)) if a.requires_grad else None
    return out


def log(a: Tensor) -> Tensor:
    out = Tensor(np.log(a.value), (a,))
    out._backward = lambda g: a._accumulate(g / a.value) if a.requires_grad else None
    return out


def softmax_rows(a: Tensor) -> Tensor:
    """Row-wise softmax of a 2-D tensor (max-subtracted for stability)."""
    _check(a.value.ndim == 2, f"softmax_rows: {a.shape}")
    z = a.value - a.value.max(axis=1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=1, keepdims=True)
    out = Tensor(y, (a,))

    def bw(g):
        if a.requires_grad:
            dot = (g * y).sum(axis=1, keepdims=True)
            a._accumulate(y * (g - dot))

    out._backward = bw
    return out


def softmax_vec(a: Tensor) -> Tensor:
    _check(a.value.ndim == 1, f"softmax_vec: {a.shape}")
    z = a.value - a.value.max()
    e = np.exp(z)
    y = e / e.sum()
    out = Tensor(y, (a,))

    def bw(g):
        if a.requires_grad:
            a._accumulate(y * (g - float(g @ y)))

    out._backward = bw
    return out


# --- shaping ---


def concat_cols(parts: list[Tensor]) -> Tensor:
    _check(all(p.value.ndim == 2 for p in parts), "concat_cols: 2-D only")
    out = Tensor(np.concatenate([p.value for p in parts], axis=1), tuple(parts))
    widths = [p.value.shape[1] for p in parts]

    def bw(g):
        at = 0
        for p, w in zip(parts, widths):
            if p.requires_grad:
                p._accumulate(g[:, at : at + w])
            at += w

    out._backward = bw
    return out


def concat_rows(parts: list[Tensor]) -> Tensor:
    _check(all(p.value.ndim == 2 for p in parts), "concat_rows: 2-D only")
    out = Tensor(np.concatenate([p.value for p in parts], axis=0), tuple(parts))
    heights = [p.value.shape[0] for p in parts]

    def bw(g):
        at = 0
        for p, h in zip(parts, heights):
            if p.requires_grad:
                p._accumulate(g[at : at + h, :])
            at += h

    out._backward = bw
    return out


def concat_vec(parts: list[Tensor]) -> Tensor:
    _check(all(p.value.ndim == 1 for p in parts), "concat_vec: 1-D only")
    out = Tensor(np.concatenate([p.value for p in parts]), tuple(parts))
    widths = [p.value.shape[0] for p in parts]

    def bw(g):
        at = 0
        for p, w in zip(parts, widths):
            if p.requires_grad:
                p._accumulate(g[at : at + w])
            at += w

    out._backward = bw
    return out


def gather_rows(a: Tensor, idx) -> Tensor:
    """Select rows of 2-D `a` (repeats allowed); gradient scatter-adds back."""
    idx = np.asarray(idx, dtype=np.intp)
    _check(a.value.ndim == 2, f"gather_rows: {a.shape}")
    out = Tensor(a.value[idx], (a,))

    def bw(g):
        if a.requires_grad:
            acc = np.zeros_like(a.value)
            np.add.at(acc, idx, g)
            a._accumulate(acc)

    out._backward = bw
    return out


def slice_rows(a: Tensor, start: int, stop: int) -> Tensor:
    _check(a.value.ndim == 2, f"slice_rows: {a.shape}")
    out = Tensor(a.value[start:stop], (a,))

    def bw(g):
        if a.requires_grad:
            acc = np.zeros_like(a.value)
            acc[start:stop] = g
            a._accumulate(acc)

    out._backward = bw
    return out


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    _check(a.value.ndim == 2, f"slice_cols: {a.shape}")
    out = Tensor(a.value[:, start:stop], (a,))

    def bw(g):
        if a.requires_grad:
            acc = np.zeros_like(a.value)
            acc[:, start:stop] = g
            a._accumulate(acc)

    out._backward = bw
    return out


def row(a: Tensor, i: int) -> Tensor:
    """Extract row i of a 2-D tensor as a 1-D tensor."""
    _check(a.value.ndim == 2, f"row: {a.shape}")
    out = Tensor(a.value[i], (a,))

    def bw(g):
        if a.requires_grad:
            acc = np.zeros_like(a.value)
            acc[i] = g
            a._accumulate(acc)

    out._backward = bw
    return out


def as_row_matrix(v: Tensor) -> Tensor:
    """1-D (n,) → 2-D (1, n)."""
    _check(v.value.ndim == 1, f"as_row_matrix: {v.shape}")
    out = Tensor(v.value[None, :], (v,))
    out._backward = lambda g: v._accumulate(g[0]) if v.requires_grad else None
    return out


def pad_cols(a: Tensor, n: int) -> Tensor:
    """Append n zero columns to a 2-D tensor."""
    _check(a.value.ndim == 2 and n >= 0, f"pad_cols: {a.shape}, n={n}")
    if n == 0:
        return a
    out = Tensor(np.pad(a.value, ((0, 0), (0, n))), (a,))
    w = a.value.shape[1]
    out._backward = lambda g: a._accumulate(g[:, :w]) if a.requires_grad else None
    return out


def stack_rows(vectors: list[Tensor]) -> Tensor:
    _check(all(v.value.ndim == 1 for v in vectors), "stack_rows: 1-D only")
    out = Tensor(np.stack([v.value for v in vectors]), tuple(vectors))

    def bw(g):
        for i, v in enumerate(vectors):
            if v.requires_grad:
                v._accumulate(g[i])

    out._backward = bw
    return out


# --- reductions / selection ---


def sum_all(a: Tensor) -> Tensor:
    out = Tensor(a.value.sum(), (a,))
    out._backward = (
        (lambda g: a._accumulate(np.full_like(a.value, float(g)))) if a.requires_grad else None
    )
    return out


def mean_rows(a: Tensor) -> Tensor:
    """Column-wise mean of a 2-D tensor → 1-D."""
    _check(a.value.ndim == 2, f"mean_rows: {a.shape}")
    n = a.value.shape[0]
    out = Tensor(a.value.mean(axis=0), (a,))
    out._backward = (
        (lambda g: a._accumulate(np.repeat(g[None, :] / n, n, axis=0)))
        if a.requires_grad
        else None
    )
    return out


def pick(v: Tensor, i: int) -> Tensor:
    """Scalar v[i] from a 1-D tensor."""
    _check(v.value.ndim == 1, f"pick: {v.shape}")
    out = Tensor(v.value[i], (v,))

    def bw(g):
        if v.requires_grad:
            acc = np.zeros_like(v.value)
            acc[i] = g
            v._accumulate(acc)

    out._backward = bw
    return out


def picks(a: Tensor, ids) -> Tensor:
    """1-D vector of a[t, ids[t]] over rows t of a 2-D tensor."""
    ids = np.asarray(ids, dtype=np.intp)
    _check(a.value.ndim == 2 and ids.shape == (a.value.shape[0],), f"picks: {a.shape}")
    rows_idx = np.arange(a.value.shape[0])
    out = Tensor(a.value[rows_idx, ids], (a,))

    def bw(g):
        if a.requires_grad:
            acc = np.zeros_like(a.value)
            acc[rows_idx, ids] = g
            a._accumulate(acc)

    out._backward = bw
    return out


def scatter_sum_cols(src: Tensor, index, width: int) -> Tensor:
    """out[t, index[p]] += src[t, p]: fold per-position mass onto vocab ids."""
    index = np.asarray(index, dtype=np.intp)
    _check(
        src.value.ndim == 2 and index.shape == (src.value.shape[1],),
        f"scatter_sum_cols: {src.shape} with {index.shape}",
    )
    rows_n = src.value.shape[0]
    out_v = np.zeros((rows_n, width))
    np.add.at(out_v, (np.arange(rows_n)[:, None], index[None, :]), src.value)
    out = Tensor(out_v, (src,))
    out._backward = (
        (lambda g: src._accumulate(g[:, index])) if src.requires_grad else None
    )
    return out
