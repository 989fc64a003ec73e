"""Dialogue/task-instance data model, JSONL persistence, splits, statistics.

JSONL schema (one dialogue per line, version "caise-dialogue/1"):

  version    str, must equal "caise-dialogue/1"
  id         str, unique
  utterances [{"speaker": "user"|"assistant", "tokens": [str, ...]}, ...]
  commands   [bracketed command string, ...]
  images     [{"ref": "corpus:<id>"|"edit:<hash>",
               "detections": [{"id": str, "image_id": str,
                               "bbox": [x1, y1, x2, y2],
                               "concept": [str, ...],      # 1..3 tokens
                               "feature": [float, ...]}]}, ...]
  alignment  [int, ...]  # per command: index of the utterance it follows

Unknown fields are rejected. commands, images, and alignment are
equinumerous; the first command is always a search.
"""

from __future__ import annotations

import json
import statistics
import string
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from random import Random

from .commands import Command, Search, command_type_label, format_command, parse_command
from .errors import AlignmentError, SchemaError, TooFewDialoguesError

SCHEMA_VERSION = "caise-dialogue/1"

# Paper split proportions as exact fractions of the 1611-dialogue collection.
DEFAULT_SPLIT_RATIOS = (Fraction(1052, 1611), Fraction(262, 1611), Fraction(297, 1611))

_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


def tokenize(text: str) -> list[str]:
    """Lowercase, replace ASCII punctuation with spaces, split on whitespace."""
    return text.lower().translate(_PUNCT_TABLE).split()


@dataclass(frozen=True)
class Utterance:
    speaker: str  # "user" | "assistant"
    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.speaker not in ("user", "assistant"):
            raise ValueError(f"bad speaker {self.speaker!r}")
        if not self.tokens:
            raise ValueError("empty utterance")


@dataclass(frozen=True)
class ObjectDetection:
    id: str
    image_id: str
    bbox: tuple[float, float, float, float]  # normalized x1, y1, x2, y2
    concept: tuple[str, ...]  # attribute token(s) then head noun, 1..3 tokens
    feature: tuple[float, ...]

    def __post_init__(self):
        x1, y1, x2, y2 = self.bbox
        if not (x1 < x2 and y1 < y2):
            raise ValueError(f"degenerate bbox {self.bbox}")
        if not (1 <= len(self.concept) <= 3):
            raise ValueError(f"concept must be 1..3 tokens, got {self.concept}")

    @property
    def bbox_feature(self) -> tuple[float, float, float, float, float]:
        """The four coordinates plus area."""
        x1, y1, x2, y2 = self.bbox
        return (x1, y1, x2, y2, (x2 - x1) * (y2 - y1))


@dataclass(frozen=True)
class ImageRecord:
    ref: str  # "corpus:<entry id>" or "edit:<content hash>"
    detections: tuple[ObjectDetection, ...]

    @property
    def kind(self) -> str:
        return self.ref.split(":", 1)[0]


@dataclass(frozen=True)
class Dialogue:
    id: str
    utterances: tuple[Utterance, ...]
    commands: tuple[Command, ...]
    images: tuple[ImageRecord, ...]
    alignment: tuple[int, ...]

    def __post_init__(self):
        if not self.commands:
            raise ValueError("dialogue has no commands")
        if not isinstance(self.commands[0], Search):
            raise ValueError("first command must be a search")
        if not (len(self.commands) == len(self.images) == len(self.alignment)):
            raise ValueError("commands, images, and alignment must be equinumerous")


@dataclass(frozen=True)
class TaskInstance:
    dialogue_id: str
    index: int  # position of the target command within its dialogue
    utterances: tuple[Utterance, ...]  # prefix up to and including the request
    image_history: tuple[ImageRecord, ...]
    command_history: tuple[Command, ...]
    target: Command | None  # None for inference-time instances


def instances_from_dialogue(d: Dialogue) -> list[TaskInstance]:
    """One prediction instance per command, in execution order."""
    out = []
    for k, cmd in enumerate(d.commands):
        a = d.alignment[k]
        if not (0 <= a < len(d.utterances)):
            raise AlignmentError(f"{d.id}: command {k} aligned to utterance {a}")
        out.append(
            TaskInstance(
                dialogue_id=d.id,
                index=k,
                utterances=d.utterances[: a + 1],
                image_history=d.images[:k],
                command_history=d.commands[:k],
                target=cmd,
            )
        )
    return out


def split_sizes(n: int, ratios=DEFAULT_SPLIT_RATIOS) -> tuple[int, int, int]:
    """Largest-remainder apportionment of n items over the three ratios."""
    fracs = [Fraction(r) for r in ratios]
    if sum(fracs) != 1:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    quotas = [f * n for f in fracs]
    sizes = [int(q) for q in quotas]  # floor
    remainder = n - sum(sizes)
    by_rem = sorted(range(3), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in by_rem[:remainder]:
        sizes[i] += 1
    return sizes[0], sizes[1], sizes[2]


def split_dialogues(dialogues, ratios=DEFAULT_SPLIT_RATIOS, seed: int = 0):
    """Deterministic dialogue-level split into (train, val, test)."""
    ds = list(dialogues)
    if len(ds) < 3:
        raise TooFewDialoguesError(f"need at least 3 dialogues, got {len(ds)}")
    n_train, n_val, n_test = split_sizes(len(ds), ratios)
    order = list(range(len(ds)))
    Random(seed).shuffle(order)
    shuffled = [ds[i] for i in order]
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


# --- statistics ---


def _length_stats(lengths: list[int]) -> dict:
    if not lengths:
        return {"avg": 0.0, "stddev": 0.0, "median": 0.0, "max": 0, "min": 0}
    return {
        "avg": statistics.fmean(lengths),
        "stddev": statistics.pstdev(lengths),
        "median": float(statistics.median(lengths)),
        "max": max(lengths),
        "min": min(lengths),
    }


def stats(dialogues) -> dict:
    """Aggregate corpus statistics (counts, utterance lengths, command mix)."""
    ds = list(dialogues)
    n = len(ds)
    all_lens: list[int] = []
    user_lens: list[int] = []
    asst_lens: list[int] = []
    cmd_freq: dict[str, int] = {}
    n_commands = 0
    for d in ds:
        for u in d.utterances:
            all_lens.append(len(u.tokens))
            (user_lens if u.speaker == "user" else asst_lens).append(len(u.tokens))
        for c in d.commands:
            cmd_freq[command_type_label(c)] = cmd_freq.get(command_type_label(c), 0) + 1
            n_commands += 1
    per = lambda count: count / n if n else 0.0
    return {
        "dialogues": n,
        "utterances": {
            "total": len(all_lens),
            "user": len(user_lens),
            "assistant": len(asst_lens),
            "per_dialogue": per(len(all_lens)),
            "user_per_dialogue": per(len(user_lens)),
            "assistant_per_dialogue": per(len(asst_lens)),
        },
        "commands": {"total": n_commands, "per_dialogue": per(n_commands)},
        "lengths": {
            "all": _length_stats(all_lens),
            "user": _length_stats(user_lens),
            "assistant": _length_stats(asst_lens),
        },
        "command_frequencies": dict(sorted(cmd_freq.items())),
    }


def stats_table(report: dict) -> str:
    lines = []
    lines.append(f"{'':24}{'per dialogue':>14}{'total':>10}")
    lines.append(f"{'Dialogue':24}{'-':>14}{report['dialogues']:>10}")
    u = report["utterances"]
    lines.append(f"{'Utterance':24}{u['per_dialogue']:>14.1f}{u['total']:>10}")
    lines.append(f"{'Utterance (user)':24}{u['user_per_dialogue']:>14.1f}{u['user']:>10}")
    lines.append(f"{'Utterance (assistant)':24}{u['assistant_per_dialogue']:>14.1f}{u['assistant']:>10}")
    c = report["commands"]
    lines.append(f"{'Executable Command':24}{c['per_dialogue']:>14.1f}{c['total']:>10}")
    lines.append("")
    lines.append(f"{'':12}{'avg':>8}{'stddev':>8}{'median':>8}{'max':>6}{'min':>6}")
    for name, key in (("Utterance", "all"), ("(user)", "user"), ("(assistant)", "assistant")):
        s = report["lengths"][key]
        lines.append(
            f"{name:12}{s['avg']:>8.2f}{s['stddev']:>8.2f}{s['median']:>8.1f}{s['max']:>6}{s['min']:>6}"
        )
    lines.append("")
    lines.append("command frequencies:")
    total = max(1, report["commands"]["total"])
    for name, count in report["command_frequencies"].items():
        lines.append(f"  {name:12}{count:>7}  {100.0 * count / total:>5.1f}%")
    return "\n".join(lines)


# --- JSONL persistence ---


def _require(obj: dict, key: str, line: int):
    if key not in obj:
        raise SchemaError(f"missing field {key!r}", line)
    return obj[key]


def _reject_unknown(obj: dict, allowed: set[str], line: int, where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"unknown field(s) {sorted(unknown)} in {where}", line)


def _detection_from_json(obj: dict, line: int) -> ObjectDetection:
    if not isinstance(obj, dict):
        raise SchemaError("detection must be an object", line)
    _reject_unknown(obj, {"id", "image_id", "bbox", "concept", "feature"}, line, "detection")
    try:
        return ObjectDetection(
            id=str(_require(obj, "id", line)),
            image_id=str(_require(obj, "image_id", line)),
            bbox=tuple(float(v) for v in _require(obj, "bbox", line)),
            concept=tuple(str(t) for t in _require(obj, "concept", line)),
            feature=tuple(float(v) for v in _require(obj, "feature", line)),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad detection: {exc}", line) from exc


def detection_to_json(det: ObjectDetection) -> dict:
    return {
        "id": det.id,
        "image_id": det.image_id,
        "bbox": list(det.bbox),
        "concept": list(det.concept),
        "feature": list(det.feature),
    }


def _dialogue_from_json(obj: dict, line: int) -> Dialogue:
    if not isinstance(obj, dict):
        raise SchemaError("dialogue record must be an object", line)
    _reject_unknown(
        obj, {"version", "id", "utterances", "commands", "images", "alignment"}, line, "dialogue"
    )
    version = _require(obj, "version", line)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported version {version!r}", line)
    utterances = []
    for u in _require(obj, "utterances", line):
        if not isinstance(u, dict):
            raise SchemaError("utterance must be an object", line)
        _reject_unknown(u, {"speaker", "tokens"}, line, "utterance")
        try:
            utterances.append(
                Utterance(
                    speaker=_require(u, "speaker", line),
                    tokens=tuple(str(t) for t in _require(u, "tokens", line)),
                )
            )
        except ValueError as exc:
            raise SchemaError(str(exc), line) from exc
    commands = []
    for c in _require(obj, "commands", line):
        try:
            commands.append(parse_command(c))
        except Exception as exc:
            raise SchemaError(f"bad command {c!r}: {exc}", line) from exc
    images = []
    for rec in _require(obj, "images", line):
        if not isinstance(rec, dict):
            raise SchemaError("image record must be an object", line)
        _reject_unknown(rec, {"ref", "detections"}, line, "image record")
        dets = tuple(
            _detection_from_json(d, line) for d in _require(rec, "detections", line)
        )
        images.append(ImageRecord(ref=str(_require(rec, "ref", line)), detections=dets))
    alignment = tuple(int(a) for a in _require(obj, "alignment", line))
    try:
        return Dialogue(
            id=str(_require(obj, "id", line)),
            utterances=tuple(utterances),
            commands=tuple(commands),
            images=tuple(images),
            alignment=alignment,
        )
    except ValueError as exc:
        raise SchemaError(str(exc), line) from exc


def dialogue_to_json(d: Dialogue) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "id": d.id,
        "utterances": [{"speaker": u.speaker, "tokens": list(u.tokens)} for u in d.utterances],
        "commands": [format_command(c) for c in d.commands],
        "images": [
            {"ref": rec.ref, "detections": [detection_to_json(det) for det in rec.detections]}
            for rec in d.images
        ],
        "alignment": list(d.alignment),
    }


def save_jsonl(path: str | Path, dialogues) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in dialogues:
            fh.write(json.dumps(dialogue_to_json(d), separators=(",", ":")) + "\n")


def load_jsonl(path: str | Path) -> list[Dialogue]:
    out = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", line_no) from exc
            d = _dialogue_from_json(obj, line_no)
            if d.id in seen:
                raise SchemaError(f"duplicate dialogue id {d.id!r}", line_no)
            seen.add(d.id)
            out.append(d)
    return out
