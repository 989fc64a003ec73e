"""Training loop: per-instance updates, validation-selected checkpoints."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dialogue import TaskInstance
from ..errors import NonFiniteLossError
from ..evaluator import EvalReport, evaluate
from ..nn.autodiff import Tensor, param
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from ..nn.optim import AdamState, adam_step, clip_global_norm, zero_grads
from .config import ModelConfig
from .net import instance_loss, predict
from .params import init_params


@dataclass
class EpochStats:
    epoch: int
    train_loss: float       # mean per-instance negative log-likelihood
    val_accuracy: float


@dataclass
class TrainResult:
    params: dict[str, Tensor]
    config: ModelConfig
    seed: int
    mode: str
    clamp_generate: bool
    best_epoch: int
    best_val_accuracy: float
    history: list[EpochStats] = field(default_factory=list)
    wall_seconds: float = 0.0

    def report_json(self) -> str:
        return json.dumps({
            "seed": self.seed,
            "mode": self.mode,
            "clamp_generate": self.clamp_generate,
            "best_epoch": self.best_epoch,
            "best_val_accuracy": self.best_val_accuracy,
            "wall_seconds": round(self.wall_seconds, 3),
            "history": [
                {"epoch": h.epoch, "train_loss": round(h.train_loss, 6),
                 "val_accuracy": round(h.val_accuracy, 6)}
                for h in self.history
            ],
        }, indent=2)


def evaluate_instances(params: dict[str, Tensor], config: ModelConfig,
                       instances: list[TaskInstance], mode: str = "full",
                       clamp_generate: bool = False) -> EvalReport:
    """Greedy-decode every instance and score against its target."""
    pairs = []
    dialogue_ids = []
    for inst in instances:
        result = predict(params, config, inst, mode, clamp_generate)
        pairs.append((result.command, inst.target))
        dialogue_ids.append(inst.dialogue_id)
    return evaluate(pairs, dialogue_ids)


def _snapshot(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    return {k: v.value.copy() for k, v in params.items()}


def _restore(snapshot: dict[str, np.ndarray]) -> dict[str, Tensor]:
    return {k: param(v.copy(), name=k) for k, v in snapshot.items()}


def train_model(train_instances: list[TaskInstance],
                val_instances: list[TaskInstance],
                config: ModelConfig, seed: int, mode: str = "full",
                clamp_generate: bool = False, log=None) -> TrainResult:
    """Train one model; keep the parameters of the best validation epoch.

    Updates are per instance: forward, backward, global-norm clip, Adam.
    Validation accuracy (greedy decode, type-aware match) selects the
    checkpoint; ties keep the earlier epoch.
    """
    if not train_instances or not val_instances:
        raise ValueError("need non-empty training and validation sets")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    params = init_params(config, rng)
    adam = AdamState(params, lr=config.learning_rate)

    best: dict[str, np.ndarray] = _snapshot(params)
    best_epoch = 0
    best_acc = -1.0
    history: list[EpochStats] = []

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_instances))
        total = 0.0
        for idx in order:
            inst = train_instances[int(idx)]
            zero_grads(params)
            loss = instance_loss(params, config, inst, mode, rng,
                                 clamp_generate)
            value = float(loss.value)
            if not np.isfinite(value):
                raise NonFiniteLossError(
                    f"epoch {epoch}, instance {inst.dialogue_id}/{inst.index}: "
                    f"loss={value}"
                )
            loss.backward()
            clip_global_norm(params, config.grad_clip)
            adam_step(params, adam)
            total += value
        report = evaluate_instances(params, config, val_instances, mode,
                                    clamp_generate)
        stats = EpochStats(epoch, total / len(train_instances),
                           report.accuracy)
        history.append(stats)
        if log is not None:
            log(f"epoch {epoch:3d}  loss {stats.train_loss:8.4f}  "
                f"val {stats.val_accuracy:6.1%}")
        if report.accuracy > best_acc:
            best_acc = report.accuracy
            best_epoch = epoch
            best = _snapshot(params)

    return TrainResult(
        params=_restore(best),
        config=config,
        seed=seed,
        mode=mode,
        clamp_generate=clamp_generate,
        best_epoch=best_epoch,
        best_val_accuracy=best_acc,
        history=history,
        wall_seconds=time.perf_counter() - started,
    )


def save_model(path, params: dict[str, Tensor], config: ModelConfig) -> None:
    save_checkpoint(path, params, json.loads(config.to_json()))


def load_model(path) -> tuple[dict[str, Tensor], ModelConfig]:
    """Load a checkpoint file, or the ``model.npz`` inside a directory."""
    p = Path(path)
    if p.is_dir():
        p = p / "model.npz"
    params, doc = load_checkpoint(p)
    return params, ModelConfig.from_json(json.dumps(doc))


#: experiment arms: (label, ablation mode, gate clamped to generate-only)
ABLATION_ARMS = (
    ("base", "full", True),
    ("full", "full", False),
    ("request-only", "request-only", False),
    ("dialog-history-only", "dialog-history-only", False),
    ("request+history", "request+history", False),
    ("vision-only", "vision-only", False),
    ("request+vision", "request+vision", False),
)


def run_arm(label: str, train_instances, val_instances, test_instances,
            config: ModelConfig, seeds=None, log=None):
    """Train one experiment arm across seeds; returns per-seed test reports."""
    arms = {name: (mode, clamp) for name, mode, clamp in ABLATION_ARMS}
    if label not in arms:
        raise ValueError(f"unknown arm {label!r}; expected one of "
                         f"{sorted(arms)}")
    mode, clamp = arms[label]
    outcomes = []
    for seed in (seeds if seeds is not None else config.seeds):
        result = train_model(train_instances, val_instances, config, seed,
                             mode, clamp, log=log)
        report = evaluate_instances(result.params, config, test_instances,
                                    mode, clamp)
        outcomes.append((result, report))
        if log is not None:
            log(f"[{label} seed {seed}] test accuracy {report.accuracy:6.1%} "
                f"(best epoch {result.best_epoch}, "
                f"{result.wall_seconds:.1f}s)")
    return outcomes
