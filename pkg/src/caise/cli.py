"""Operator command line: one binary, subcommand per workflow.

Exit codes: 0 success, 1 runtime failure (message on stderr), 2 usage
errors (argparse).  Every subcommand that prints a report also accepts
``--json`` for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from dataclasses import replace as dc_replace
from pathlib import Path

import numpy as np

from . import __version__
from .commands import format_command, parse_command
from .dialogue import (
    instances_from_dialogue,
    load_jsonl,
    save_jsonl,
    split_dialogues,
    stats,
    stats_table,
)
from .errors import CaiseError
from .model.config import ModelConfig
from .model.train import (
    ABLATION_ARMS,
    evaluate_instances,
    load_model,
    run_arm,
    save_model,
    train_model,
)
from .model.vocab import build_vocab
from .search import ingest, load_corpus, save_index
from .templates import load_template_bank


def _emit(args, payload: dict, human: str) -> None:
    print(json.dumps(payload, indent=2) if args.json else human)


def _instances(dialogues):
    return [inst for d in dialogues for inst in instances_from_dialogue(d)]


def _infer_visual_dim(dialogues) -> int:
    for d in dialogues:
        for rec in d.images:
            for det in rec.detections:
                return len(det.feature)
    raise CaiseError("no detections in the data; pass --visual-dim explicitly")


def _model_config(args, dialogues) -> ModelConfig:
    vocab = build_vocab(load_template_bank())
    visual = args.visual_dim or _infer_visual_dim(dialogues)
    return ModelConfig(
        vocab=vocab,
        hidden_dim=args.hidden,
        embed_dim=args.embed,
        visual_dim=visual,
        learning_rate=args.lr,
        epochs=args.epochs,
    )


# --- subcommand handlers ---


def cmd_gen_corpus(args) -> int:
    from .synthcorpus import gen_corpus

    manifest = gen_corpus(Path(args.out), n_entries=args.entries, seed=args.seed,
                          feature_dim=args.feature_dim)
    _emit(args, {"manifest": str(manifest), "entries": args.entries},
          f"wrote {args.entries} entries; manifest at {manifest}")
    return 0


def cmd_ingest_corpus(args) -> int:
    index = ingest(args.manifest)
    save_index(index, args.out)
    n_det = len(index.detections)
    _emit(args, {"index": str(args.out), "entries": index.doc_count,
                 "detections": n_det},
          f"indexed {index.doc_count} entries ({n_det} detections) -> {args.out}")
    return 0


def cmd_synth_data(args) -> int:
    from .synth import synthesize_dialogues

    corpus = load_corpus(args.corpus)
    bank = load_template_bank()
    dialogues = synthesize_dialogues(args.n, corpus, bank, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_jsonl(out / "dialogues.jsonl", dialogues)
    train, val, test = split_dialogues(dialogues, seed=args.split_seed)
    for name, part in (("train", train), ("val", val), ("test", test)):
        save_jsonl(out / f"{name}.jsonl", part)
    payload = {
        "dialogues": len(dialogues),
        "train": len(train),
        "val": len(val),
        "test": len(test),
        "out": str(out),
    }
    _emit(args, payload,
          f"synthesized {len(dialogues)} dialogues "
          f"(split {len(train)}/{len(val)}/{len(test)}) -> {out}")
    return 0


def cmd_stats(args) -> int:
    report = stats(load_jsonl(args.data))
    _emit(args, report, stats_table(report))
    return 0


def cmd_train(args) -> int:
    train_ds = load_jsonl(Path(args.data_dir) / "train.jsonl")
    val_ds = load_jsonl(Path(args.data_dir) / "val.jsonl")
    config = _model_config(args, train_ds)
    log = None if args.json else lambda msg: print(msg, flush=True)
    result = train_model(_instances(train_ds), _instances(val_ds), config,
                         seed=args.seed, mode=args.mode,
                         clamp_generate=args.clamp_generate, log=log)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(out / "model.npz", result.params, config)
    (out / "training_report.json").write_text(result.report_json(), encoding="utf-8")
    payload = json.loads(result.report_json())
    _emit(args, payload,
          f"best epoch {result.best_epoch}: val accuracy "
          f"{100 * result.best_val_accuracy:.2f}% -> {out}")
    return 0


def cmd_eval(args) -> int:
    params, config = load_model(args.checkpoint)
    dialogues = load_jsonl(args.data)
    report = evaluate_instances(params, config, _instances(dialogues),
                                mode=args.mode, clamp_generate=args.clamp_generate)
    _emit(args, json.loads(report.to_json()), report.table())
    return 0


def cmd_ablate(args) -> int:
    train_ds = load_jsonl(Path(args.data_dir) / "train.jsonl")
    val_ds = load_jsonl(Path(args.data_dir) / "val.jsonl")
    test_ds = load_jsonl(Path(args.data_dir) / "test.jsonl")
    config = _model_config(args, train_ds)
    seeds = tuple(int(s) for s in args.seeds.split(","))
    tr, va, te = _instances(train_ds), _instances(val_ds), _instances(test_ds)

    rows = []
    details = {}
    for label, _mode, _clamp in ABLATION_ARMS:
        log = None if args.json else (lambda msg: print(msg, flush=True))
        outcomes = run_arm(label, tr, va, te, config, seeds=seeds, log=log)
        accs = [report.accuracy for _result, report in outcomes]
        mean = sum(accs) / len(accs)
        rows.append((label, mean))
        details[label] = {"mean_accuracy": mean,
                          "per_seed": dict(zip(map(str, seeds), accs))}
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "ablation_report.json").write_text(
                json.dumps(details, indent=2), encoding="utf-8")

    width = max(len(label) for label, _ in rows)
    table = "\n".join(
        [f"{'arm':<{width}}  test accuracy"]
        + [f"{label:<{width}}  {100 * acc:13.2f}%" for label, acc in rows]
    )
    _emit(args, details, table)
    return 0


def cmd_gradcheck(args) -> int:
    from .model.net import instance_loss
    from .model.params import init_params
    from .nn.gradcheck import grad_check, max_error
    from .search import ingest as ingest_manifest
    from .synth import synthesize_dialogues
    from .synthcorpus import gen_corpus

    with tempfile.TemporaryDirectory() as tmp:
        manifest = gen_corpus(Path(tmp), n_entries=12, seed=0, feature_dim=4)
        corpus = ingest_manifest(manifest)
        dialogues = synthesize_dialogues(2, corpus, load_template_bank(), seed=0)
    instances = _instances(dialogues)[: args.instances]
    config = ModelConfig(vocab=build_vocab(load_template_bank()),
                         hidden_dim=args.hidden, embed_dim=8, visual_dim=4)
    worst = 0.0
    for seed in range(args.seeds):
        params = init_params(config, np.random.default_rng(seed))
        for inst in instances:
            report = grad_check(
                lambda: instance_loss(params, config, inst, mode="full", rng=None),
                params, max_coords_per_block=args.coords, seed=seed)
            worst = max(worst, max_error(report))
    ok = bool(worst < args.tolerance)
    _emit(args, {"max_relative_error": float(worst), "tolerance": args.tolerance,
                 "pass": ok},
          f"max relative error {worst:.3e} "
          f"({'PASS' if ok else 'FAIL'} at {args.tolerance:g})")
    return 0 if ok else 1


def cmd_exec(args) -> int:
    from .image_ops import execute
    from .raster import load_png, save_png

    command = parse_command(args.cmd)
    state = load_png(args.image) if args.image else None
    backend = load_corpus(args.corpus) if args.corpus else None
    result = execute(command, state, search_backend=backend)
    save_png(result.image, args.out)
    _emit(args, {"executed_command": format_command(command), "out": str(args.out),
                 **result.metadata},
          f"{format_command(command)} -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, load_service_config, serve

    if args.config:
        config = load_service_config(args.config)
    else:
        if not (args.corpus and args.checkpoint):
            raise CaiseError("serve needs --config or both --corpus and --checkpoint")
        config = ServiceConfig(corpus=args.corpus, checkpoint=args.checkpoint)
    if args.port is not None:
        config = dc_replace(config, port=args.port)
    if args.host is not None:
        config = dc_replace(config, host=args.host)
    if args.ui_dir is not None:
        config = dc_replace(config, ui_dir=args.ui_dir)
    serve(config)
    return 0


# --- parser wiring ---


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hidden", type=int, default=64, help="state size (even)")
    p.add_argument("--embed", type=int, default=32, help="token embedding size")
    p.add_argument("--visual-dim", type=int, default=None,
                   help="object feature size (default: inferred from data)")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=30)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caise",
        description="Conversational image search and editing toolkit.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen-corpus", help="generate a synthetic image corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--entries", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--feature-dim", type=int, default=16)
    p.set_defaults(fn=cmd_gen_corpus)

    p = sub.add_parser("ingest-corpus", help="build a search index from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ingest_corpus)

    p = sub.add_parser("synth-data", help="synthesize dialogues and split them")
    p.add_argument("--corpus", required=True, help="manifest .jsonl or saved index")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(fn=cmd_synth_data)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--data", required=True)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("train", help="train a next-command model")
    p.add_argument("--data-dir", required=True,
                   help="directory holding train.jsonl and val.jsonl")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=2020)
    p.add_argument("--mode", default="full")
    p.add_argument("--clamp-generate", action="store_true",
                   help="disable the copy heads (generation-only baseline)")
    _add_model_flags(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dialogue file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--mode", default="full")
    p.add_argument("--clamp-generate", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="train and score every context-ablation arm")
    p.add_argument("--data-dir", required=True,
                   help="directory holding train/val/test.jsonl")
    p.add_argument("--out", default=None, help="where to write the JSON report")
    p.add_argument("--seeds", default="2020,2021,2022")
    _add_model_flags(p)
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--hidden", type=int, default=8)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--instances", type=int, default=3)
    p.add_argument("--coords", type=int, default=8,
                   help="coordinates sampled per parameter block")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(fn=cmd_gradcheck)

    p = sub.add_parser("exec", help="apply one bracketed command to an image")
    p.add_argument("--cmd", required=True)
    p.add_argument("--image", default=None, help="input PNG (omit for search)")
    p.add_argument("--corpus", default=None, help="search backend (manifest or index)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_exec)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--config", default=None, help="service config JSON")
    p.add_argument("--corpus", default=None)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--ui-dir", default=None)
    p.set_defaults(fn=cmd_serve)

    for sp in sub.choices.values():
        sp.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CaiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
