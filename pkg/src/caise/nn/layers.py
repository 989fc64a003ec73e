"""Layer math on top of the autodiff core: linear, LSTM, BiLSTM, positional
encoding, dropout masks, cross-entropy."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ShapeMismatchError
from . import autodiff as ad
from .autodiff import Tensor


def init_matrix(rng: np.random.Generator, rows: int, cols: int, name=None) -> Tensor:
    """Fan-in scaled Gaussian init."""
    scale = 1.0 / math.sqrt(max(1, rows))
    return ad.param(rng.normal(0.0, scale, size=(rows, cols)), name=name)


def init_vector(rng: np.random.Generator, n: int, name=None, fill=0.0) -> Tensor:
    return ad.param(np.full(n, fill, dtype=np.float64), name=name)


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    y = ad.matmul(x, weight)
    return ad.add(y, bias) if bias is not None else y


def embed(table: Tensor, ids) -> Tensor:
    return ad.gather_rows(table, ids)


def cross_entropy(dist: Tensor, target_id: int) -> Tensor:
    """−log p[target] of a 1-D probability vector."""
    return ad.neg(ad.log(ad.pick(dist, target_id)))


def dropout(x: Tensor, p: float, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout; identity when rng is None (evaluation) or p == 0."""
    if rng is None or p <= 0.0:
        return x
    mask = (rng.random(x.value.shape) >= p) / (1.0 - p)
    return ad.mul(x, ad.tensor(mask))


def lstm_params(rng, in_dim: int, hidden: int, prefix: str) -> dict[str, Tensor]:
    """One LSTM cell: input/recurrent weights and bias for the i,f,g,o gates.

    The forget-gate slice of the bias starts at 1 for early-training stability.
    """
    bias = np.zeros(4 * hidden)
    bias[hidden : 2 * hidden] = 1.0
    return {
        f"{prefix}.W": init_matrix(rng, in_dim, 4 * hidden, f"{prefix}.W"),
        f"{prefix}.R": init_matrix(rng, hidden, 4 * hidden, f"{prefix}.R"),
        f"{prefix}.b": ad.param(bias, name=f"{prefix}.b"),
    }


def lstm_step(x: Tensor, h: Tensor, c: Tensor, params: dict, prefix: str):
    """Batched LSTM step: x (B×I), h/c (B×H) → next (h, c)."""
    hidden = h.value.shape[1]
    z = ad.add(
        ad.add(ad.matmul(x, params[f"{prefix}.W"]), ad.matmul(h, params[f"{prefix}.R"])),
        params[f"{prefix}.b"],
    )
    i = ad.sigmoid(ad.slice_cols(z, 0, hidden))
    f = ad.sigmoid(ad.slice_cols(z, hidden, 2 * hidden))
    g = ad.tanh(ad.slice_cols(z, 2 * hidden, 3 * hidden))
    o = ad.sigmoid(ad.slice_cols(z, 3 * hidden, 4 * hidden))
    c_next = ad.add(ad.mul(f, c), ad.mul(i, g))
    h_next = ad.mul(o, ad.tanh(c_next))
    return h_next, c_next


def run_lstm(steps: list[Tensor], params: dict, prefix: str, hidden: int,
             init: tuple[Tensor, Tensor] | None = None):
    """Run an LSTM over a list of (B×I) inputs; returns per-step h and final (h, c).

    `init` supplies the starting (h, c); zeros when omitted.
    """
    if not steps:
        raise ShapeMismatchError("run_lstm: empty sequence")
    batch = steps[0].value.shape[0]
    if init is not None:
        h, c = init
    else:
        h = ad.tensor(np.zeros((batch, hidden)))
        c = ad.tensor(np.zeros((batch, hidden)))
    outputs = []
    for x in steps:
        h, c = lstm_step(x, h, c, params, prefix)
        outputs.append(h)
    return outputs, (h, c)


class BiLstmOut:
    """Outputs of a batched bidirectional LSTM over variable-length rows.

    states:    (P×2h) per-position forward‖backward states, rows ordered by
               (row, position) over real positions only
    summary:   (B×2h) per-row [last forward ; first backward]
    positions: list of (row, position) pairs aligned with `states` rows
    """

    def __init__(self, states, summary, positions):
        self.states = states
        self.summary = summary
        self.positions = positions


def bilstm_params(rng, in_dim: int, hidden: int, prefix: str) -> dict[str, Tensor]:
    """Two independent cells, one per direction."""
    return {
        **lstm_params(rng, in_dim, hidden, f"{prefix}.f"),
        **lstm_params(rng, in_dim, hidden, f"{prefix}.b"),
    }


def bilstm(rows_ids: list[list[int]], table: Tensor, params: dict, prefix: str,
           hidden: int, drop_p: float = 0.0, rng=None) -> BiLstmOut:
    """Bidirectional LSTM over token-id rows of varying length.

    `hidden` is the per-direction size; cells are `{prefix}.f` / `{prefix}.b`.
    Rows are padded internally to the longest length (pad positions feed
    token id 0 and are discarded on the way out).  Embeddings come from
    `table` with dropout `drop_p`.
    """
    if not rows_ids or any(not r for r in rows_ids):
        raise ShapeMismatchError("bilstm: empty row")
    batch = len(rows_ids)
    lengths = [len(r) for r in rows_ids]
    n_max = max(lengths)

    fwd_ids = np.zeros((batch, n_max), dtype=np.intp)
    rev_ids = np.zeros((batch, n_max), dtype=np.intp)
    for i, r in enumerate(rows_ids):
        fwd_ids[i, : len(r)] = r
        rev_ids[i, : len(r)] = r[::-1]

    def run(ids, cell):
        steps = []
        for t in range(n_max):
            x = dropout(embed(table, ids[:, t]), drop_p, rng)
            steps.append(x)
        outputs, _ = run_lstm(steps, params, cell, hidden)
        return ad.concat_rows(outputs)  # (n_max·B × h), step-major

    fwd_all = run(fwd_ids, f"{prefix}.f")  # position p of row i at row p·B+i
    rev_all = run(rev_ids, f"{prefix}.b")  # reversed-stream position j at j·B+i

    fwd_take, bwd_take = [], []
    positions = []
    for i, n in enumerate(lengths):
        for p in range(n):
            fwd_take.append(p * batch + i)
            bwd_take.append((n - 1 - p) * batch + i)
            positions.append((i, p))
    states = ad.concat_cols(
        [ad.gather_rows(fwd_all, fwd_take), ad.gather_rows(rev_all, bwd_take)]
    )

    last_f = [(n - 1) * batch + i for i, n in enumerate(lengths)]
    first_b = [(n - 1) * batch + i for i, n in enumerate(lengths)]
    summary = ad.concat_cols(
        [ad.gather_rows(fwd_all, last_f), ad.gather_rows(rev_all, first_b)]
    )
    return BiLstmOut(states, summary, positions)


def positional_encoding(index: int, d: int) -> np.ndarray:
    """Sinusoidal encoding: pairs of sin/cos at geometric wavelengths."""
    if index < 0:
        raise ValueError("index must be ≥ 0")
    enc = np.zeros(d)
    for k in range(0, d, 2):
        freq = 1.0 / (10000.0 ** (k / d))
        enc[k] = math.sin(index * freq)
        if k + 1 < d:
            enc[k + 1] = math.cos(index * freq)
    return enc


def positional_encoding_rows(indices, d: int) -> np.ndarray:
    return np.stack([positional_encoding(i, d) for i in indices])
