"""Command-line entry points: corpus generation, training, evaluation,
the ablation grid, voice-held-out folds, and the journal service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import generate_corpus, read_manifest
from .data import EncodedCorpus
from .model import VARIANTS, DissonanceModel, ModelConfig
from .service import DEFAULT_THRESHOLD, ServiceConfig, run_server
from .training import (
    DEFAULT_SEEDS,
    TrainConfig,
    evaluate,
    run_ablation,
    run_lovo,
    train,
    write_ablation_report,
)


def _load_corpus(manifest_path, d: int, encoder_seed: int) -> EncodedCorpus:
    manifest_path = Path(manifest_path)
    rows = read_manifest(manifest_path)
    return EncodedCorpus(rows, manifest_path.parent, d=d, encoder_seed=encoder_seed)


def _model_config(args) -> ModelConfig:
    return ModelConfig(d=args.d, heads=args.heads, variant=args.variant,
                       encoder_seed=args.encoder_seed)


def _train_config(args) -> TrainConfig:
    return TrainConfig(lr=args.lr, batch_size=args.batch_size,
                       patience=args.patience, max_epochs=args.max_epochs)


def _add_model_args(p, with_variant=True):
    if with_variant:
        p.add_argument("--variant", choices=VARIANTS, default="full")
    p.add_argument("--d", type=int, default=64, help="embedding width")
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--encoder-seed", type=int, default=101)


def _add_train_args(p):
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--patience", type=int, default=7)
    p.add_argument("--max-epochs", type=int, default=60)


def cmd_datagen(args) -> int:
    rows = generate_corpus(args.out, seed=args.seed, dry_run=args.dry_run)
    per_class: dict[str, int] = {}
    per_split: dict[str, int] = {}
    for row in rows:
        per_class[str(row["label"])] = per_class.get(str(row["label"]), 0) + 1
        per_split[row["split"]] = per_split.get(row["split"], 0) + 1
    print(json.dumps({
        "out": str(args.out),
        "seed": args.seed,
        "dry_run": args.dry_run,
        "samples": len(rows),
        "per_class": per_class,
        "per_split": per_split,
    }, indent=2))
    return 0


def cmd_train(args) -> int:
    corpus = _load_corpus(args.manifest, args.d, args.encoder_seed)
    result = train(corpus, _model_config(args), seed=args.seed,
                   train_cfg=_train_config(args), log=print)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / f"{args.variant}_seed{args.seed}.npz"
    result.model.save(ckpt)
    history_path = out / f"{args.variant}_seed{args.seed}_history.jsonl"
    with open(history_path, "w") as fh:
        for entry in result.history:
            fh.write(json.dumps(entry) + "\n")
    report = evaluate(result.model, corpus, corpus.indices(split="val"), fold="val")
    print(json.dumps({"checkpoint": str(ckpt),
                      "best_epoch": result.best_epoch,
                      "epochs_run": result.epochs_run,
                      "val_macro_f1": report.macro_f1}))
    return 0


def cmd_eval(args) -> int:
    model = DissonanceModel.load(args.ckpt)
    corpus = _load_corpus(args.manifest, model.config.d, model.config.encoder_seed)
    idxs = corpus.indices(split=args.split)
    report = evaluate(model, corpus, idxs, fold=args.split)
    print(json.dumps(report.to_record(), indent=2))
    return 0


def cmd_ablate(args) -> int:
    corpus = _load_corpus(args.manifest, args.d, args.encoder_seed)
    base = ModelConfig(d=args.d, heads=args.heads, encoder_seed=args.encoder_seed)
    seeds = tuple(int(s) for s in args.seeds.split(","))
    result = run_ablation(corpus, base_config=base, seeds=seeds,
                          train_cfg=_train_config(args), log=print)
    jsonl, table = write_ablation_report(result, args.out)
    print(result["table"])
    print(f"records: {jsonl}\ntable: {table}")
    return 0


def cmd_lovo(args) -> int:
    corpus = _load_corpus(args.manifest, args.d, args.encoder_seed)
    base = ModelConfig(d=args.d, heads=args.heads, encoder_seed=args.encoder_seed)
    result = run_lovo(corpus, base_config=base, seed=args.seed,
                      train_cfg=_train_config(args), log=print)
    for record in result["records"]:
        print(json.dumps(record))
    print(result["table"])
    return 0


def cmd_serve(args) -> int:
    config = ServiceConfig.from_env(
        checkpoint_path=args.checkpoint, store_dir=args.store,
        threshold=args.threshold, listen=args.listen)
    run_server(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dissonance",
        description="Cross-modal dissonance corpus, training, and service tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datagen", help="render the synthetic journal corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--dry-run", action="store_true",
                   help="plan and validate without writing audio")
    p.set_defaults(fn=cmd_datagen)

    p = sub.add_parser("train", help="train one variant on a manifest")
    p.add_argument("--variant", choices=VARIANTS, default="full")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    _add_model_args(p, with_variant=False)
    _add_train_args(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint on a manifest split")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="train all variants x seeds, emit the table")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True,
                   help="line-delimited records path; table written alongside")
    p.add_argument("--seeds", default=",".join(str(s) for s in DEFAULT_SEEDS))
    _add_model_args(p, with_variant=False)
    _add_train_args(p)
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("lovo", help="leave-one-voice-out folds")
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=42)
    _add_model_args(p, with_variant=False)
    _add_train_args(p)
    p.set_defaults(fn=cmd_lovo)

    p = sub.add_parser("serve", help="run the journal inference service")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--store", default=None)
    p.add_argument("--listen", default=None, help="host:port")
    p.add_argument("--threshold", type=float, default=None,
                   help=f"prompt threshold (default {DEFAULT_THRESHOLD})")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
