"""Context ablation modes.

Each mode selects which parts of an instance's context the model may see:
a slice of the utterance history and/or the visual channel.  The *request*
is the last two utterances (the user's current ask plus the assistant turn
before it); *history* is everything before the request.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..dialogue import TaskInstance, Utterance

MODES = (
    "full",
    "request-only",
    "dialog-history-only",
    "request+history",
    "vision-only",
    "request+vision",
)


@dataclass(frozen=True)
class ContextView:
    """What the encoder receives after masking."""

    utterances: tuple[Utterance, ...]
    use_vision: bool
    utterances_masked: bool  # True when the mode hides the utterance channel


def apply_mode(instance: TaskInstance, mode: str) -> ContextView:
    utts = instance.utterances
    request = utts[-2:]
    history = utts[:-2]
    if mode == "full":
        return ContextView(utts, use_vision=True, utterances_masked=False)
    if mode == "request-only":
        return ContextView(request, use_vision=False, utterances_masked=False)
    if mode == "dialog-history-only":
        return ContextView(history, use_vision=False,
                           utterances_masked=not history)
    if mode == "request+history":
        return ContextView(utts, use_vision=False, utterances_masked=False)
    if mode == "vision-only":
        return ContextView((), use_vision=True, utterances_masked=True)
    if mode == "request+vision":
        return ContextView(request, use_vision=True, utterances_masked=False)
    raise ValueError(f"unknown ablation mode {mode!r}; expected one of {MODES}")
