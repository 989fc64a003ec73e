"""Model hyperparameters and their JSON round trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from ..errors import SchemaError

CONFIG_VERSION = "caise-model-config/1"

#: tokens every vocabulary must contain for the decoder to be able to emit
#: any syntactically complete command.
STRUCTURAL_TOKENS = (
    "<bos>", "<eos>", "<unk>",
    "search", "adjust_color", "adjust_attr",
    "brightness", "contrast", "rotate", "image_cutout",
)


@dataclass(frozen=True)
class ModelConfig:
    """Sizes, regularization, and optimization settings.

    ``hidden_dim`` must be even: the utterance and concept encoders are
    bidirectional with half the hidden size per direction.
    """

    vocab: tuple[str, ...]
    hidden_dim: int = 512
    embed_dim: int = 256
    visual_dim: int = 2048
    max_decode_len: int = 12
    dropout_embed: float = 0.3
    dropout_fused: float = 0.5
    learning_rate: float = 1e-4
    epochs: int = 500
    grad_clip: float = 5.0
    seeds: tuple[int, ...] = (2020, 2021, 2022)

    def __post_init__(self):
        if self.hidden_dim < 2 or self.hidden_dim % 2:
            raise ValueError(f"hidden_dim must be even and >= 2: {self.hidden_dim}")
        if self.embed_dim < 1 or self.visual_dim < 1:
            raise ValueError("embed_dim and visual_dim must be positive")
        if self.max_decode_len < 3:
            raise ValueError("max_decode_len too small to emit any command")
        if not (0.0 <= self.dropout_embed < 1.0 and 0.0 <= self.dropout_fused < 1.0):
            raise ValueError("dropout rates must be in [0, 1)")
        if self.learning_rate <= 0 or self.epochs < 1 or self.grad_clip <= 0:
            raise ValueError("bad optimization settings")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        missing = [t for t in STRUCTURAL_TOKENS if t not in set(self.vocab)]
        if missing:
            raise ValueError(f"vocabulary is missing structural tokens: {missing}")
        if len(set(self.vocab)) != len(self.vocab):
            raise ValueError("vocabulary contains duplicate tokens")

    def with_overrides(self, **kw) -> "ModelConfig":
        return replace(self, **kw)

    def to_json(self) -> str:
        doc = asdict(self)
        doc["vocab"] = list(self.vocab)
        doc["seeds"] = list(self.seeds)
        doc["version"] = CONFIG_VERSION
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"model config is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaError("model config must be a JSON object")
        version = doc.pop("version", None)
        if version != CONFIG_VERSION:
            raise SchemaError(
                f"unsupported model config version {version!r}; "
                f"expected {CONFIG_VERSION!r}"
            )
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise SchemaError(f"unknown model config fields: {sorted(unknown)}")
        try:
            doc["vocab"] = tuple(doc["vocab"])
            doc["seeds"] = tuple(doc["seeds"])
        except KeyError as exc:
            raise SchemaError(f"model config is missing {exc.args[0]!r}") from exc
        try:
            return cls(**doc)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad model config: {exc}") from exc
