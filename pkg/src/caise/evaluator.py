"""Prediction scoring.

A predicted command is judged against the reference by type-aware rules:

* ``search`` — the query must match as a token multiset (order-free);
* ``adjust_color`` — the color name must match; intensity is not scored;
* every other command — exact equality (attribute, value, angle);
* commands of different types never match, and an unparseable prediction
  (``None``) never matches anything.

Reports break accuracy down by command type and, when dialogue ids are
supplied, add the dialogue success rate: the fraction of dialogues whose
instances were *all* predicted correctly.  That rate can never exceed
instance accuracy.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .commands import (
    AdjustColor,
    Command,
    Search,
    command_type_label,
    format_command,
)
from .errors import LengthMismatchError

#: presentation order for per-type rows
_TYPE_ORDER = ("search", "color", "brightness", "contrast", "rotation",
               "remove-back")


def command_match(pred: Command | None, gold: Command) -> bool:
    """Type-aware equivalence of a prediction to the reference command."""
    if pred is None or type(pred) is not type(gold):
        return False
    if isinstance(gold, Search):
        return Counter(pred.query) == Counter(gold.query)
    if isinstance(gold, AdjustColor):
        return pred.color == gold.color
    return pred == gold


@dataclass
class TypeStats:
    correct: int = 0
    total: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


@dataclass
class EvalReport:
    total: int = 0
    correct: int = 0
    per_type: dict[str, TypeStats] = field(default_factory=dict)
    dialogue_total: int | None = None
    dialogue_correct: int | None = None

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def dialogue_success_rate(self) -> float | None:
        if self.dialogue_total is None:
            return None
        return (self.dialogue_correct / self.dialogue_total
                if self.dialogue_total else 0.0)

    def to_json(self) -> str:
        doc = {
            "total": self.total,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "per_type": {
                name: {"correct": s.correct, "total": s.total,
                       "accuracy": s.accuracy}
                for name, s in sorted(self.per_type.items())
            },
        }
        if self.dialogue_total is not None:
            doc["dialogue_total"] = self.dialogue_total
            doc["dialogue_correct"] = self.dialogue_correct
            doc["dialogue_success_rate"] = self.dialogue_success_rate
        return json.dumps(doc, indent=2)

    def table(self) -> str:
        rows = [("command type", "correct", "total", "accuracy")]
        ordered = [t for t in _TYPE_ORDER if t in self.per_type]
        ordered += [t for t in sorted(self.per_type) if t not in _TYPE_ORDER]
        for name in ordered:
            s = self.per_type[name]
            rows.append((name, str(s.correct), str(s.total),
                         f"{s.accuracy:6.1%}"))
        rows.append(("overall", str(self.correct), str(self.total),
                     f"{self.accuracy:6.1%}"))
        if self.dialogue_total is not None:
            rows.append(("dialogues", str(self.dialogue_correct),
                         str(self.dialogue_total),
                         f"{self.dialogue_success_rate:6.1%}"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = []
        for i, r in enumerate(rows):
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


def evaluate(pairs, dialogue_ids=None) -> EvalReport:
    """Score (prediction, reference) pairs.

    ``pairs`` is a sequence of ``(pred, gold)`` where ``pred`` may be None.
    ``dialogue_ids``, when given, must align with ``pairs`` one to one and
    enables the dialogue success rate.
    """
    pairs = list(pairs)
    report = EvalReport()
    if dialogue_ids is not None:
        dialogue_ids = list(dialogue_ids)
        if len(dialogue_ids) != len(pairs):
            raise LengthMismatchError(
                f"{len(pairs)} pairs but {len(dialogue_ids)} dialogue ids"
            )
        per_dialogue_ok: dict[str, bool] = {}
    for i, (pred, gold) in enumerate(pairs):
        if not isinstance(gold, Command):
            raise TypeError(f"reference is not a command: {gold!r}")
        ok = command_match(pred, gold)
        report.total += 1
        report.correct += int(ok)
        stats = report.per_type.setdefault(command_type_label(gold), TypeStats())
        stats.total += 1
        stats.correct += int(ok)
        if dialogue_ids is not None:
            did = dialogue_ids[i]
            per_dialogue_ok[did] = per_dialogue_ok.get(did, True) and ok
    if dialogue_ids is not None:
        report.dialogue_total = len(per_dialogue_ok)
        report.dialogue_correct = sum(per_dialogue_ok.values())
    return report


def describe_pair(pred: Command | None, gold: Command) -> str:
    """One-line human-readable comparison, for logs and error listings."""
    left = format_command(pred) if pred is not None else "<unparseable>"
    mark = "==" if command_match(pred, gold) else "!="
    return f"{left} {mark} {format_command(gold)}"
