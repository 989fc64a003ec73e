"""Command predictor network.

Context encoding
----------------
* **Visual rows** — one row per detected object across the instance's image
  history: the detection feature concatenated with five box features, put
  through a linear layer, plus a sinusoidal positional code of the *image*
  position, so the model can tell which picture in the session each object
  came from.
* **Concept rows** — per image, the concept tokens of its detections form a
  sequence encoded by a bidirectional LSTM (half the hidden size per
  direction); every token position becomes one row, with the same image-wise
  positional code added.  Each row's copy surface is its concept token.
* **Utterance rows** — each utterance is encoded by a bidirectional LSTM;
  every token position becomes a copyable row.  A second, unidirectional
  LSTM reads the per-utterance summaries in order, producing one row per
  utterance; its final state initializes the decoder.
* **Fusion** — visual rows attend over the utterance-level rows; each visual
  row is combined with its attended context as [v; u; v*u] through a linear
  map, yielding the fused visual memory the decoder attends to.

Channels that are empty or masked out by an ablation mode are replaced by a
single learned placeholder row whose copy surface is ``<unk>``, so every
attention softmax is over a non-empty set.

Decoding
--------
The decoder LSTM consumes the previous target token (teacher forcing) or
its own previous output (greedy decoding).  Its state is fused with the
visual memory by the same [h; c; h*c]-style combination, and the fused
vector drives four heads: a generate distribution over the base vocabulary,
copy distributions over utterance and concept rows, and a three-way gate.
The emitted distribution is the gate-weighted mixture over the base
vocabulary extended with the instance's copyable out-of-vocabulary tokens.
A clamped variant pins the gate to the generate channel; it is the ablation
baseline without copy paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..commands import Command, command_to_tokens, tokens_to_command
from ..dialogue import TaskInstance
from ..errors import CommandError, EmptyContextError
from ..nn import autodiff as ad
from ..nn.autodiff import Tensor
from ..nn.layers import (
    bilstm,
    dropout,
    embed,
    lstm_step,
    positional_encoding_rows,
    run_lstm,
)
from .ablation import apply_mode
from .config import ModelConfig
from .params import BOX_FEATURES
from .vocab import BOS, EOS, UNK, ExtendedVocab, Vocabulary, extend

GATE_CHANNELS = ("generate", "utterance", "concept")


@dataclass
class EncodedContext:
    """Everything the decoder needs, computed once per instance."""

    vbar: Tensor                     # fused visual memory (R×d)
    utt_states: Tensor               # utterance token rows (P×d)
    utt_tokens: tuple[str, ...]      # copy surface per utterance row
    con_states: Tensor               # concept token rows (L×d)
    con_tokens: tuple[str, ...]      # copy surface per concept row
    dec_init: tuple[Tensor, Tensor]  # decoder start state, each (1×d)
    ext: ExtendedVocab
    utt_copy_ids: list[int]          # extended id per utterance row
    con_copy_ids: list[int]          # extended id per concept row


def _gather_detections(instance: TaskInstance):
    """(image position, detection) pairs over the instance's image history."""
    out = []
    for pos, record in enumerate(instance.image_history):
        for det in record.detections:
            out.append((pos, det))
    return out


def encode(params: dict[str, Tensor], config: ModelConfig,
           instance: TaskInstance, mode: str = "full",
           rng: np.random.Generator | None = None) -> EncodedContext:
    """Encode one instance's context under an ablation mode.

    ``rng`` enables embedding dropout (training); pass None for evaluation.
    """
    vocab = Vocabulary(config.vocab)
    d = config.hidden_dim
    half = d // 2
    view = apply_mode(instance, mode)
    detections = _gather_detections(instance) if view.use_vision else []

    if mode == "full" and not instance.utterances and not detections:
        raise EmptyContextError(
            f"instance {instance.dialogue_id}/{instance.index} has no "
            "utterances and no detections"
        )

    # --- utterance channel ---
    utt_rows = [[vocab.id(t) for t in u.tokens] for u in view.utterances]
    if utt_rows:
        enc = bilstm(utt_rows, params["embed.table"], params, "enc_utt",
                     half, config.dropout_embed, rng)
        utt_states = enc.states
        utt_tokens = tuple(
            view.utterances[r].tokens[p] for r, p in enc.positions
        )
        summary_steps = [
            ad.as_row_matrix(ad.row(enc.summary, i))
            for i in range(len(view.utterances))
        ]
        dlg_rows, dec_init = run_lstm(summary_steps, params, "enc_dlg", d)
        dlg = ad.concat_rows(dlg_rows)
    else:
        utt_states = params["null.utt_state"]
        utt_tokens = (UNK,)
        dlg = params["null.utt_summary"]
        zero = ad.tensor(np.zeros((1, d)))
        dec_init = (zero, zero)

    # --- visual and concept channels ---
    if detections:
        feats = np.array(
            [list(det.feature) + list(det.bbox_feature) for _, det in detections]
        )
        if feats.shape[1] != config.visual_dim + BOX_FEATURES:
            raise ValueError(
                f"detection features have {feats.shape[1] - BOX_FEATURES} "
                f"dimensions; config.visual_dim is {config.visual_dim}"
            )
        vis = ad.add(ad.matmul(ad.tensor(feats), params["vis.W"]),
                     params["vis.b"])
        pe = positional_encoding_rows([pos for pos, _ in detections], d)
        vis = ad.add(vis, ad.tensor(pe))

        con_rows: list[list[int]] = []
        con_row_meta: list[tuple[int, tuple[str, ...]]] = []
        for pos, record in enumerate(instance.image_history):
            tokens = [t for det in record.detections for t in det.concept]
            if tokens:
                con_rows.append([vocab.id(t) for t in tokens])
                con_row_meta.append((pos, tuple(tokens)))
        enc_c = bilstm(con_rows, params["embed.table"], params, "enc_con",
                       half, config.dropout_embed, rng)
        con_tokens = tuple(
            con_row_meta[r][1][p] for r, p in enc_c.positions
        )
        pe_c = positional_encoding_rows(
            [con_row_meta[r][0] for r, _ in enc_c.positions], d
        )
        con_states = ad.add(enc_c.states, ad.tensor(pe_c))
    else:
        vis = params["null.visual"]
        con_states = params["null.concept"]
        con_tokens = (UNK,)

    # --- fuse visual rows with dialogue-level context ---
    scores = ad.matmul(vis, ad.transpose(dlg))
    attended = ad.matmul(ad.softmax_rows(scores), dlg)
    fused = ad.concat_cols([vis, attended, ad.mul(vis, attended)])
    vbar = ad.matmul(fused, params["fuse.Wv"])

    copyable = [t for t in utt_tokens if t != UNK]
    copyable += [t for t in con_tokens if t != UNK]
    ext = extend(vocab, copyable)
    return EncodedContext(
        vbar=vbar,
        utt_states=utt_states,
        utt_tokens=utt_tokens,
        con_states=con_states,
        con_tokens=con_tokens,
        dec_init=dec_init,
        ext=ext,
        utt_copy_ids=[ext.id(t) for t in utt_tokens],
        con_copy_ids=[ext.id(t) for t in con_tokens],
    )


@dataclass
class StepHeads:
    """Per-step head distributions (each T×·) before mixing."""

    generate: Tensor   # (T×|base vocab|)
    utterance: Tensor  # (T×P)
    concept: Tensor    # (T×L)
    gate: Tensor       # (T×3)


def _heads(params: dict[str, Tensor], config: ModelConfig,
           enc: EncodedContext, states: Tensor,
           rng: np.random.Generator | None) -> StepHeads:
    """All four decoder heads for a (T×d) stack of decoder states."""
    scores = ad.matmul(states, ad.transpose(enc.vbar))
    ctx = ad.matmul(ad.softmax_rows(scores), enc.vbar)
    fused = ad.concat_cols([states, ctx, ad.mul(states, ctx)])
    e = ad.matmul(fused, params["attn.Wa"])
    e = dropout(e, config.dropout_fused, rng)
    return StepHeads(
        generate=ad.softmax_rows(ad.add(ad.matmul(e, params["gen.W"]),
                                        params["gen.b"])),
        utterance=ad.softmax_rows(ad.matmul(e, ad.transpose(enc.utt_states))),
        concept=ad.softmax_rows(ad.matmul(e, ad.transpose(enc.con_states))),
        gate=ad.softmax_rows(ad.matmul(e, params["gate.Wg"])),
    )


def _mixture(heads: StepHeads, enc: EncodedContext, clamp_generate: bool) -> Tensor:
    """Gate-weighted output distribution over the extended vocabulary (T×V+)."""
    t_steps = heads.generate.value.shape[0]
    n_ext = len(enc.ext)
    n_oov = n_ext - heads.generate.value.shape[1]
    gen_full = ad.pad_cols(heads.generate, n_oov)
    if clamp_generate:
        return gen_full
    g0 = ad.picks(heads.gate, [0] * t_steps)
    g1 = ad.picks(heads.gate, [1] * t_steps)
    g2 = ad.picks(heads.gate, [2] * t_steps)
    mix = ad.mul_col(gen_full, g0)
    mix = ad.add(mix, ad.scatter_sum_cols(ad.mul_col(heads.utterance, g1),
                                          enc.utt_copy_ids, n_ext))
    mix = ad.add(mix, ad.scatter_sum_cols(ad.mul_col(heads.concept, g2),
                                          enc.con_copy_ids, n_ext))
    return mix


def target_token_sequence(cmd: Command) -> list[str]:
    return [BOS] + command_to_tokens(cmd) + [EOS]


def instance_loss(params: dict[str, Tensor], config: ModelConfig,
                  instance: TaskInstance, mode: str = "full",
                  rng: np.random.Generator | None = None,
                  clamp_generate: bool = False) -> Tensor:
    """Teacher-forced negative log-likelihood of the target command."""
    if instance.target is None:
        raise ValueError("cannot compute a loss for an instance with no target")
    vocab = Vocabulary(config.vocab)
    enc = encode(params, config, instance, mode, rng)
    tokens = target_token_sequence(instance.target)
    input_ids = [vocab.id(t) for t in tokens[:-1]]
    target_ids = [enc.ext.id(t) for t in tokens[1:]]

    steps = [
        dropout(embed(params["embed.table"], [i]), config.dropout_embed, rng)
        for i in input_ids
    ]
    outputs, _ = run_lstm(steps, params, "dec", config.hidden_dim,
                          init=enc.dec_init)
    states = ad.concat_rows(outputs)
    heads = _heads(params, config, enc, states, rng)
    mix = _mixture(heads, enc, clamp_generate)
    chosen = ad.picks(mix, target_ids)
    return ad.neg(ad.sum_all(ad.log(ad.add_const(chosen, 1e-12))))


@dataclass
class DecodeStep:
    """One greedy step: the full output distribution and its provenance."""

    distribution: np.ndarray         # extended-vocabulary probabilities
    gate: tuple[float, float, float]
    contributions: np.ndarray        # (3×V+) per-channel share of the mixture


def decode_step(params: dict[str, Tensor], config: ModelConfig,
                enc: EncodedContext, prev_token: str,
                state: tuple[Tensor, Tensor],
                clamp_generate: bool = False,
                ) -> tuple[DecodeStep, tuple[Tensor, Tensor]]:
    """Advance the decoder by one token; evaluation mode (no dropout)."""
    vocab = Vocabulary(config.vocab)
    x = embed(params["embed.table"], [vocab.id(prev_token)])
    h, c = lstm_step(x, state[0], state[1], params, "dec")
    heads = _heads(params, config, enc, h, rng=None)
    mix = _mixture(heads, enc, clamp_generate)

    n_ext = len(enc.ext)
    contrib = np.zeros((3, n_ext))
    if clamp_generate:
        gate = (1.0, 0.0, 0.0)
        contrib[0, : len(vocab)] = heads.generate.value[0]
    else:
        g = heads.gate.value[0]
        gate = (float(g[0]), float(g[1]), float(g[2]))
        contrib[0, : len(vocab)] = g[0] * heads.generate.value[0]
        np.add.at(contrib[1], enc.utt_copy_ids, g[1] * heads.utterance.value[0])
        np.add.at(contrib[2], enc.con_copy_ids, g[2] * heads.concept.value[0])
    step = DecodeStep(
        distribution=mix.value[0].copy(),
        gate=gate,
        contributions=contrib,
    )
    return step, (h, c)


@dataclass
class DecodeResult:
    """Greedy decoding output with per-token provenance."""

    tokens: list[str]                 # emitted tokens, sentinels excluded
    command: Command | None           # parsed command, if the tokens form one
    valid: bool
    gate_trace: list[tuple[float, float, float]]
    token_sources: list[str]          # per token: generate|utterance|concept

    @property
    def text(self) -> str:
        return "[" + " ".join(self.tokens) + "]"


def greedy_decode(params: dict[str, Tensor], config: ModelConfig,
                  enc: EncodedContext, clamp_generate: bool = False,
                  ) -> DecodeResult:
    """Greedily decode a command; stops at ``<eos>`` or the length cap."""
    state = enc.dec_init
    prev = BOS
    tokens: list[str] = []
    gate_trace: list[tuple[float, float, float]] = []
    sources: list[str] = []
    saw_eos = False
    for _ in range(config.max_decode_len):
        step, state = decode_step(params, config, enc, prev, state,
                                  clamp_generate)
        chosen = int(np.argmax(step.distribution))
        token = enc.ext.token(chosen)
        if token == EOS:
            saw_eos = True
            break
        tokens.append(token)
        gate_trace.append(step.gate)
        sources.append(GATE_CHANNELS[int(np.argmax(step.contributions[:, chosen]))])
        prev = token  # out-of-vocabulary tokens re-enter as <unk>
    command = None
    valid = False
    if saw_eos and tokens:
        try:
            command = tokens_to_command(tokens)
            valid = True
        except CommandError:
            command = None
    return DecodeResult(
        tokens=tokens,
        command=command,
        valid=valid,
        gate_trace=gate_trace,
        token_sources=sources,
    )


def predict(params: dict[str, Tensor], config: ModelConfig,
            instance: TaskInstance, mode: str = "full",
            clamp_generate: bool = False) -> DecodeResult:
    """Encode an instance and greedily decode its command."""
    enc = encode(params, config, instance, mode, rng=None)
    return greedy_decode(params, config, enc, clamp_generate)
