"""Operator command line: train, calibrate, serve, chat, eval-ssa, stats, sample.

All randomness funnels through --seed (default 42); identical inputs and
seeds reproduce identical artifacts. `--config` supplies defaults that flags
override; the serve command also honors BOT_ADDR, BOT_MODEL, BOT_CATALOG,
BOT_WEBHOOK_SECRET and BOT_DATA_DIR.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import yaml

from . import classifier, corpus, dialogue, embednet, evalkit, featurizer
from .datastore import ConversationStore, parse_rfc3339

DEFAULT_SEED = 42
DEFAULT_VALIDATION_FRACTION = 0.2


def _split_catalog(catalog_path, fraction, seed):
    catalog = corpus.load_catalog(catalog_path)
    examples = corpus.flatten(catalog)
    train_set, val_set = corpus.split(examples, fraction, seed)
    return catalog, train_set, val_set


def cmd_train(args) -> int:
    hp = embednet.Hyperparams(
        dim_embed=args.dim_embed,
        dim_hidden=args.dim_hidden,
        margin_pos=args.margin_pos,
        margin_neg=args.margin_neg,
        negatives_per_example=args.negatives,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        l2=args.l2,
        rng_seed=args.seed,
    )
    _, train_set, val_set = _split_catalog(args.catalog, args.validation_fraction, args.seed)
    vocab = featurizer.build_vocabulary(train_set, min_count=args.min_count)
    model = embednet.init_model(vocab, hp)
    encoded = embednet.encode_examples(train_set, vocab)
    model, report = embednet.train(model, encoded, hp)
    embednet.save_model(model, args.out)

    val_accuracy = classifier.evaluate_accuracy(model, val_set) if val_set else None
    report_path = args.report or f"{args.out}.train.json"
    Path(report_path).write_text(
        json.dumps(
            {
                "loss_per_epoch": report.loss_per_epoch,
                "final_train_accuracy": report.final_train_accuracy,
                "validation_accuracy": val_accuracy,
                "hyperparams": {k: v for k, v in asdict(hp).items() if k != "n_hidden"},
            },
            indent=2,
        ),
        encoding="utf-8",
    )
    print(f"model written to {args.out}")
    print(f"final_train_accuracy: {report.final_train_accuracy:.4f}")
    if val_accuracy is not None:
        print(f"validation_accuracy: {val_accuracy:.4f}")
    return 0


def cmd_calibrate(args) -> int:
    model = embednet.load_model(args.model)
    _, _, val_set = _split_catalog(args.catalog, args.validation_fraction, args.seed)
    report = classifier.calibrate_threshold(model, val_set)
    classifier.write_calibration_report(report, args.out)
    print(f"calibration report written to {args.out}")
    print(f"n_correct: {report.n_correct}/{len(report.per_example)}")
    print(f"threshold: {report.threshold!r}")
    return 0


def _resolve_threshold(args, model, catalog_path) -> float:
    if args.threshold is not None:
        return args.threshold
    if args.calibration is not None:
        return classifier.read_calibration_threshold(args.calibration)
    _, _, val_set = _split_catalog(catalog_path, args.validation_fraction, args.seed)
    report = classifier.calibrate_threshold(model, val_set)
    print(f"calibrated threshold: {report.threshold!r}", file=sys.stderr)
    return report.threshold


def _build_engine(args, store=None) -> dialogue.Engine:
    model = embednet.load_model(args.model)
    catalog = corpus.load_catalog(args.catalog)
    threshold = _resolve_threshold(args, model, args.catalog)
    return dialogue.build_engine(model, threshold, catalog, store=store)


def cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app

    store = ConversationStore(args.data) if args.data else None
    engine = _build_engine(args, store=store)
    app = create_app(
        engine,
        webhook_secret=args.webhook_secret,
        ui_dir=args.ui,
    )
    host, _, port = args.addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def cmd_chat(args) -> int:
    engine = _build_engine(args)
    session = dialogue.Session(session_id="cli", channel="cli")
    print("crisisbot ready; empty line exits")
    while True:
        try:
            line = input("you> ")
        except EOFError:
            break
        if not line.strip():
            break
        reply = dialogue.handle_message(session, line, engine)
        print(f"bot[{reply.kind} {reply.confidence:+.3f}]> {reply.text}")
    return 0


def cmd_eval_ssa(args) -> int:
    judgments = evalkit.ingest_judgments(args.judgments)
    report = evalkit.ssa(judgments)
    print(f"sensibleness {report.sensibleness * 100:.1f}%")
    print(f"specificity {report.specificity * 100:.1f}%")
    print(f"ssa {report.ssa * 100:.1f}%")
    print(f"responses {report.n_responses}, judges {report.n_judges}")
    return 0


def cmd_stats(args) -> int:
    store = ConversationStore(args.data)
    try:
        stats = store.usage_stats(
            parse_rfc3339(args.from_),
            parse_rfc3339(args.to),
            day=parse_rfc3339(args.day).date() if args.day else None,
            month_start=parse_rfc3339(args.month_start).date() if args.month_start else None,
        )
    finally:
        store.close()
    print(f"unique_users {stats.unique_users}")
    print(f"total_questions {stats.total_questions}")
    print(f"min_q_per_conv {stats.min_q_per_conv}")
    print(f"max_q_per_conv {stats.max_q_per_conv}")
    print(f"avg_q_per_conv {stats.avg_q_per_conv:.4f}")
    print(f"dau {stats.dau}")
    print(f"mau {stats.mau}")
    print(f"stickiness {stats.stickiness:.4f}")
    return 0


def cmd_sample(args) -> int:
    store = ConversationStore(args.data)
    try:
        records = store.conversations()
    finally:
        store.close()
    sampled = evalkit.sample_conversations(records, args.n, args.min_turns, args.seed)
    evalkit.write_labeling_sheet(sampled, args.out)
    print(f"{len(sampled)} conversations written to {args.out}")
    return 0


def _apply_config(args: argparse.Namespace, parser_defaults: dict) -> None:
    """Fill unset options from --config YAML, then environment, then defaults."""
    config = {}
    if getattr(args, "config", None):
        loaded = yaml.safe_load(Path(args.config).read_text(encoding="utf-8")) or {}
        if not isinstance(loaded, dict):
            raise SystemExit(f"config file {args.config} must be a YAML mapping")
        config = {str(k).replace("-", "_"): v for k, v in loaded.items()}
    env_map = {
        "addr": "BOT_ADDR",
        "model": "BOT_MODEL",
        "catalog": "BOT_CATALOG",
        "webhook_secret": "BOT_WEBHOOK_SECRET",
        "data": "BOT_DATA_DIR",
    }
    for key, default in parser_defaults.items():
        if getattr(args, key, None) is not None:
            continue
        if key in config and config[key] is not None:
            setattr(args, key, config[key])
        elif key in env_map and os.environ.get(env_map[key]):
            setattr(args, key, os.environ[env_map[key]])
        else:
            setattr(args, key, default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crisisbot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument(
            "--validation-fraction", type=float, default=DEFAULT_VALIDATION_FRACTION
        )

    p = sub.add_parser("train", help="train the embedding model on a catalog")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--dim-embed", type=int, default=20)
    p.add_argument("--dim-hidden", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--negatives", type=int, default=10)
    p.add_argument("--margin-pos", type=float, default=0.8)
    p.add_argument("--margin-neg", type=float, default=-0.4)
    p.add_argument("--l2", type=float, default=1e-6)
    p.add_argument("--min-count", type=int, default=1)
    add_seed(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("calibrate", help="compute the rejection threshold")
    p.add_argument("--catalog", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    add_seed(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--model", default=None)
    p.add_argument("--catalog", default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--calibration", default=None)
    p.add_argument("--addr", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--webhook-secret", default=None)
    p.add_argument("--ui", default=None)
    p.add_argument("--config", default=None)
    add_seed(p)
    p.set_defaults(
        func=cmd_serve,
        _config_defaults={
            "addr": "127.0.0.1:8080",
            "model": None,
            "catalog": None,
            "data": None,
            "webhook_secret": None,
            "ui": None,
        },
    )

    p = sub.add_parser("chat", help="interactive terminal chat")
    p.add_argument("--model", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--calibration", default=None)
    add_seed(p)
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("eval-ssa", help="aggregate judge labels into the SSA report")
    p.add_argument("--judgments", required=True)
    p.set_defaults(func=cmd_eval_ssa)

    p = sub.add_parser("stats", help="usage statistics over a time range")
    p.add_argument("--data", required=True)
    p.add_argument("--from", dest="from_", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--day", default=None)
    p.add_argument("--month-start", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sample", help="draw conversations for SSA labeling")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--min-turns", type=int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_sample)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "_config_defaults"):
        _apply_config(args, args._config_defaults)
        missing = [k for k in ("model", "catalog") if getattr(args, k) is None]
        if missing:
            parser.error(f"missing required option(s): {', '.join('--' + m for m in missing)}")
    try:
        return args.func(args)
    except (corpus.CatalogError, embednet.ModelFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
