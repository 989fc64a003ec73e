"""Versioned checkpoint files: named float64 tensors + a JSON config blob."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .autodiff import Tensor, param

CHECKPOINT_VERSION = "caise-checkpoint/1"


def save_checkpoint(path: str | Path, params: dict[str, Tensor], config: dict) -> None:
    arrays = {f"param/{k}": p.value for k, p in params.items()}
    arrays["__version__"] = np.array(CHECKPOINT_VERSION)
    arrays["__config__"] = np.array(json.dumps(config, sort_keys=True))
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path: str | Path) -> tuple[dict[str, Tensor], dict]:
    with np.load(path, allow_pickle=False) as data:
        version = str(data["__version__"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version!r}")
        config = json.loads(str(data["__config__"]))
        params = {
            k[len("param/"):]: param(data[k].astype(np.float64), name=k[len("param/"):])
            for k in data.files
            if k.startswith("param/")
        }
    return params, config
