#!/usr/bin/env python3
"""Regenerate the shared grammar golden vectors.

The server's parser is the authority: every row records its verdict on one
command string — accepted (with the canonical rendering) or rejected (with
the error class). The browser client's grammar mirror and the server test
suite both run against the same file, so any drift between the two parsers
fails a named row on both sides.

Usage: python3 frontend/scripts/gen_golden_grammar.py
Writes: frontend/tests/golden_grammar.json (stable output; regenerating
without a grammar change must produce an identical file).
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from caise.commands import COLOR_NAMES, format_command, parse_command
from caise.errors import CommandError

OUT = Path(__file__).resolve().parent.parent / "tests" / "golden_grammar.json"

WORDS = [
    "red", "mug", "balloon", "wagon", "sky", "dog", "cat", "chair", "3",
    "blue", "lamp", "mailbox", "kite", "42", "hat", "apple", "boat", "tree",
]

INTENSITIES = [
    "0", "1", "0.0", "1.0", "0.5", "0.25", "0.125", "0.75", "0.999",
    "0.001", "00.5", "1.000", "0.250", "-0", "-0.0",
]

BRIGHTNESS = ["-100", "100", "0", "-0", "37", "-25", "007", "99"]
CONTRAST = ["0", "100", "50", "-0", "007", "33"]
DEGREES = ["0", "360", "90", "135", "180", "270", "-0", "007", "359"]


def valid_texts() -> list[str]:
    rng = random.Random(113355)
    texts: list[str] = []
    for _ in range(40):
        n = rng.randint(1, 4)
        texts.append("[search " + " ".join(rng.choice(WORDS) for _ in range(n)) + "]")
    for color in COLOR_NAMES:
        surface = " ".join(color.split("_"))
        for intensity in rng.sample(INTENSITIES, 4):
            texts.append(f"[adjust_color {surface} {intensity}]")
    texts += [f"[adjust_attr brightness {v}]" for v in BRIGHTNESS]
    texts += [f"[adjust_attr contrast {v}]" for v in CONTRAST]
    texts += [f"[rotate {d}]" for d in DEGREES]
    texts += [
        "[image_cutout]",
        "  [image_cutout]  ",
        "[ search   red    mug ]",
        "[\tadjust_color\tsky\tblue\t0.5\t]",
        "[adjust_color red 1]",
        "[adjust_color sky blue 0]",
    ]
    return texts


def invalid_texts() -> list[str]:
    return [
        # bracket damage / unknown names
        "search red mug",
        "[search red mug",
        "search red mug]",
        "[[search red mug]]",
        "[search [red] mug]",
        "[]",
        "[ ]",
        "",
        "   ",
        "[find red mug]",
        "[adjust red 0.5]",
        "[imagecutout]",
        "[Search red]",
        "[adjust_attr saturation 5]",
        "[adjust_attr hue -10]",
        # arity
        "[search]",
        "[adjust_color]",
        "[adjust_color red]",
        "[adjust_color sky blue]",
        "[adjust_color red 0.5 0.5]",
        "[adjust_color sky blue 0.5 extra]",
        "[adjust_attr brightness]",
        "[adjust_attr brightness 5 6]",
        "[adjust_attr]",
        "[rotate]",
        "[rotate 90 90]",
        "[image_cutout now]",
        # unknown colors (checked before intensity arity)
        "[adjust_color 0.5]",
        "[adjust_color crimson 0.5]",
        "[adjust_color sky 0.5]",
        "[adjust_color sky_blue 0.5]",
        "[adjust_color blue sky 0.5]",
        "[adjust_color redd 0.5]",
        # non-numeric
        "[adjust_attr brightness ten]",
        "[adjust_attr brightness 1.5]",
        "[adjust_attr brightness --5]",
        "[adjust_attr brightness 5.]",
        "[adjust_attr contrast 1e2]",
        "[adjust_attr contrast +5]",
        "[rotate 90.0]",
        "[rotate one]",
        "[adjust_color red .5]",
        "[adjust_color red 0.5.5]",
        "[adjust_color red 0,5]",
        "[adjust_color red 0.5000]",
        "[adjust_color red half]",
        # range
        "[adjust_attr brightness 101]",
        "[adjust_attr brightness -101]",
        "[adjust_attr brightness 999999999999999999999]",
        "[adjust_attr contrast -1]",
        "[adjust_attr contrast 101]",
        "[rotate 361]",
        "[rotate -1]",
        "[rotate 700]",
        "[adjust_color red 1.001]",
        "[adjust_color red 2]",
        "[adjust_color red -1]",
        "[adjust_color red -0.001]",
        "[adjust_color red 999999999999999999999.5]",
        # query tokens
        "[search Red mug]",
        "[search red_mug]",
        "[search red-mug]",
        "[search red mug!]",
        "[search r%d]",
        "[search sky_blue]",
    ]


def row(text: str) -> dict:
    try:
        cmd = parse_command(text)
    except CommandError as exc:
        return {"text": text, "ok": False, "error": type(exc).__name__}
    return {"text": text, "ok": True, "canonical": format_command(cmd)}


def main() -> None:
    rows = [row(t) for t in valid_texts() + invalid_texts()]
    accepted = sum(1 for r in rows if r["ok"])
    for r in rows[: len(valid_texts())]:
        assert r["ok"], f"intended-valid row rejected: {r}"
    for r in rows[len(valid_texts()):]:
        assert not r["ok"], f"intended-invalid row accepted: {r}"
    OUT.write_text(json.dumps(rows, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(rows)} rows, {accepted} accepted)")


if __name__ == "__main__":
    main()
