#!/usr/bin/env python3
"""Train and calibrate on the shipped seed corpus; write artifacts/.

Produces artifacts/seed_model.cbem, artifacts/seed_model.cbem.train.json and
artifacts/calibration.tsv, then prints the headline numbers. Everything is
seeded, so re-runs reproduce the same bytes.
"""

import argparse
import json
import time
from pathlib import Path

from crisisbot import classifier, corpus, embednet, featurizer


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="artifacts")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--validation-fraction", type=float, default=0.2)
    parser.add_argument("--epochs", type=int, default=300)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    catalog = corpus.load_catalog(corpus.seed_catalog_path())
    examples = corpus.flatten(catalog)
    train_set, val_set = corpus.split(examples, args.validation_fraction, args.seed)
    print(f"catalog: {len(catalog.entries)} intents, {len(examples)} questions "
          f"({len(train_set)} train / {len(val_set)} validation)")

    vocab = featurizer.build_vocabulary(train_set)
    hp = embednet.Hyperparams(epochs=args.epochs, rng_seed=args.seed)
    model = embednet.init_model(vocab, hp)
    t0 = time.monotonic()
    model, report = embednet.train(model, embednet.encode_examples(train_set, vocab), hp)
    print(f"trained in {time.monotonic() - t0:.1f}s; "
          f"final_train_accuracy={report.final_train_accuracy:.3f}")

    model_path = out_dir / "seed_model.cbem"
    embednet.save_model(model, model_path)
    val_accuracy = classifier.evaluate_accuracy(model, val_set)
    print(f"validation_accuracy={val_accuracy:.3f}")
    model_path.with_name(model_path.name + ".train.json").write_text(
        json.dumps(
            {
                "loss_per_epoch": report.loss_per_epoch,
                "final_train_accuracy": report.final_train_accuracy,
                "validation_accuracy": val_accuracy,
            },
            indent=2,
        ),
        encoding="utf-8",
    )

    calibration = classifier.calibrate_threshold(model, val_set)
    classifier.write_calibration_report(calibration, out_dir / "calibration.tsv")
    print(f"threshold={calibration.threshold:.4f} "
          f"({calibration.n_correct}/{len(calibration.per_example)} validation correct)")
    print(f"artifacts in {out_dir}/")


if __name__ == "__main__":
    main()
