"""Parameter initialization for the command predictor."""

from __future__ import annotations

import numpy as np

from ..nn.autodiff import Tensor
from ..nn.layers import bilstm_params, init_matrix, init_vector, lstm_params
from .config import ModelConfig

#: dimensions appended to each detection's feature vector: normalized box
#: corners plus area.
BOX_FEATURES = 5


def init_params(config: ModelConfig, rng: np.random.Generator,
                ) -> dict[str, Tensor]:
    """Create all trainable tensors, keyed by layer-dot-name."""
    d = config.hidden_dim
    half = d // 2
    e = config.embed_dim
    v_base = len(config.vocab)

    params: dict[str, Tensor] = {}
    params["embed.table"] = init_matrix(rng, v_base, e, name="embed.table")

    params.update(bilstm_params(rng, e, half, "enc_utt"))
    params.update(lstm_params(rng, d, d, "enc_dlg"))
    params.update(bilstm_params(rng, e, half, "enc_con"))

    params["vis.W"] = init_matrix(rng, config.visual_dim + BOX_FEATURES, d,
                                  name="vis.W")
    params["vis.b"] = init_vector(rng, d, name="vis.b")
    params["fuse.Wv"] = init_matrix(rng, 3 * d, d, name="fuse.Wv")
    params["attn.Wa"] = init_matrix(rng, 3 * d, d, name="attn.Wa")

    params.update(lstm_params(rng, e, d, "dec"))
    params["gen.W"] = init_matrix(rng, d, v_base, name="gen.W")
    params["gen.b"] = init_vector(rng, v_base, name="gen.b")
    params["gate.Wg"] = init_matrix(rng, d, 3, name="gate.Wg")

    # Learned stand-in rows for empty or masked channels; their copy
    # surface is <unk>.
    params["null.visual"] = init_matrix(rng, 1, d, name="null.visual")
    params["null.concept"] = init_matrix(rng, 1, d, name="null.concept")
    params["null.utt_state"] = init_matrix(rng, 1, d, name="null.utt_state")
    params["null.utt_summary"] = init_matrix(rng, 1, d, name="null.utt_summary")
    return params
