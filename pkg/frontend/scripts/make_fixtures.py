#!/usr/bin/env python3
"""Build the end-to-end test fixtures: a tiny corpus plus a checkpoint
whose proposals on the scripted utterances are known in advance.

The checkpoint is produced by the real trainer, overfit on exactly the
conversation the test will hold (request-only context, so only the last
assistant/user utterance pair matters). After training, this script
*verifies* every scripted prediction and every scripted execution outcome
(the full-intensity color fill makes the image uniform, so the following
cutout must fail; the retry search image must cut out fine) and refuses to
write fixtures that would make the test flaky.

Outputs under frontend/fixtures/rigged/:
  corpus/        PNGs + manifest.jsonl
  model.npz      the rigged checkpoint
  service.json   service config wired to the two above (request-only mode)
  expected.json  the script: utterances, expected proposals, override
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from caise.commands import format_command, parse_command
from caise.dialogue import ImageRecord, TaskInstance, Utterance, tokenize
from caise.errors import CutoutFailedError
from caise.image_ops import adjust_color, image_cutout
from caise.model.config import ModelConfig
from caise.model.net import predict
from caise.model.train import save_model, train_model
from caise.model.vocab import build_vocab
from caise.raster import load_png
from caise.search import ingest
from caise.session import DEFAULT_CONFIRMATION
from caise.synthcorpus import gen_corpus
from caise.templates import load_template_bank

ROOT = Path(__file__).resolve().parent.parent / "fixtures" / "rigged"

CORPUS_ENTRIES = 16
CORPUS_SEED = 4
FEATURE_DIM = 16
TRAIN_SEED = 2020
EPOCHS = 120
MODE = "request-only"


def pick_entries(index):
    """First entry for the scripted search, plus a retry entry whose image
    survives the cutout. Colors must be single tokens so the scripted
    utterance and the search query stay word-aligned."""
    usable = []
    for entry_id in sorted(index.entries):
        e = index.entries[entry_id]
        color, noun = None, None
        for tag in e.tags:
            if "_" in tag:
                continue
            if tag in ("red", "orange", "green", "blue", "purple", "brown",
                       "yellow", "pink"):
                color = tag
            elif tag not in ("square", "circle", "triangle"):
                noun = tag
        if color and noun:
            usable.append((entry_id, color, noun))
    if len(usable) < 2:
        raise SystemExit("corpus seed yields too few usable entries; pick another")
    first = usable[0]
    for cand in usable[1:]:
        img = load_png(index.root / index.entries[cand[0]].path)
        try:
            image_cutout(img)
        except CutoutFailedError:
            continue
        return first, cand
    raise SystemExit("no retry entry passes the cutout; pick another corpus seed")


def instance(utterance_texts: list[str], target, index: int) -> TaskInstance:
    """A training instance shaped exactly like the live session would
    frame it: alternating user/assistant prefix, confirmation turns
    included. Image/command history are irrelevant to the request-only
    view, so records are minimal."""
    utts = []
    for i, text in enumerate(utterance_texts):
        speaker = "user" if i % 2 == 0 else "assistant"
        utts.append(Utterance(speaker, tuple(tokenize(text))))
    return TaskInstance(
        dialogue_id="rigged",
        index=index,
        utterances=tuple(utts),
        image_history=tuple(ImageRecord(ref=f"corpus:x{i}", detections=())
                            for i in range(index)),
        command_history=(),
        target=target,
    )


def main() -> int:
    ROOT.mkdir(parents=True, exist_ok=True)
    manifest = gen_corpus(ROOT / "corpus", n_entries=CORPUS_ENTRIES,
                          seed=CORPUS_SEED, feature_dim=FEATURE_DIM)
    index = ingest(manifest)
    (first, retry) = pick_entries(index)
    first_id, first_color, first_noun = first
    retry_id, retry_color, retry_noun = retry

    ask_search = f"find me a {first_color} {first_noun}"
    ask_color = "make it fully purple"
    ask_cutout = "cut out the subject"
    confirm = DEFAULT_CONFIRMATION

    target_search = parse_command(f"[search {first_color} {first_noun}]")
    target_color = parse_command("[adjust_color purple 1.0]")
    target_cutout = parse_command("[image_cutout]")

    instances = [
        instance([ask_search], target_search, 0),
        instance([ask_search, confirm, ask_color], target_color, 1),
        instance([ask_search, confirm, ask_color, confirm, ask_cutout],
                 target_cutout, 2),
    ]

    config = ModelConfig(
        vocab=build_vocab(load_template_bank()),
        hidden_dim=32, embed_dim=16, visual_dim=FEATURE_DIM,
        epochs=EPOCHS, learning_rate=5e-3,
    )
    result = train_model(instances, instances, config, seed=TRAIN_SEED, mode=MODE)

    expected_proposals = {}
    for inst, target, label in [
        (instances[0], target_search, "search"),
        (instances[1], target_color, "color"),
        (instances[2], target_cutout, "cutout"),
    ]:
        decoded = predict(result.params, config, inst, mode=MODE)
        want = format_command(target)
        if decoded.text != want or not decoded.valid:
            print(f"rigging failed: {label} decodes to {decoded.text!r}, want {want!r}")
            return 1
        for row in decoded.gate_trace:
            assert len(row) == 3 and abs(sum(row) - 1.0) < 1e-6
        expected_proposals[label] = want

    # Scripted execution outcomes must be what the test assumes.
    first_img = load_png(index.root / index.entries[first_id].path)
    uniform = adjust_color(first_img, "purple", 1.0)
    try:
        image_cutout(uniform)
        print("rigging failed: cutout of the uniform image did not fail")
        return 1
    except CutoutFailedError:
        pass
    image_cutout(load_png(index.root / index.entries[retry_id].path))  # must succeed

    save_model(ROOT / "model.npz", result.params, config)

    ui_dist = Path(__file__).resolve().parent.parent / "dist"
    (ROOT / "service.json").write_text(json.dumps({
        "corpus": str(ROOT / "corpus"),
        "checkpoint": str(ROOT / "model.npz"),
        "host": "127.0.0.1",
        "port": 8971,
        "mode": MODE,
        "ui_dir": str(ui_dist),
    }, indent=1), encoding="utf-8")

    (ROOT / "expected.json").write_text(json.dumps({
        "utterances": {"search": ask_search, "color": ask_color, "cutout": ask_cutout},
        "proposals": expected_proposals,
        "override_command": f"[search {retry_color} {retry_noun}]",
        "first_entry": {"id": first_id, "color": first_color, "noun": first_noun},
        "retry_entry": {"id": retry_id, "color": retry_color, "noun": retry_noun},
        "confirmation": confirm,
        "val_accuracy": result.best_val_accuracy,
    }, indent=1), encoding="utf-8")

    print(f"fixtures ready under {ROOT} (val accuracy {result.best_val_accuracy:.0%})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
