#!/usr/bin/env python3
"""Measure out-of-scope rejection: fallback rate of random gibberish vs the
calibrated threshold, plus where the in-corpus confidences sit around it.

Useful when editing the seed corpus: the gap between the weakest correct
validation confidence (the threshold) and the strongest gibberish confidence
is the safety margin of the rejection gate.
"""

import argparse
import random
import string

import numpy as np

from crisisbot import classifier, corpus, embednet, featurizer


def gibberish(rng, n):
    alphabet = string.ascii_lowercase + "    "
    return ["".join(rng.choice(alphabet) for _ in range(rng.randint(3, 30))) for _ in range(n)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--fuzz-seed", type=int, default=20260810)
    parser.add_argument("--n", type=int, default=200)
    args = parser.parse_args()

    catalog = corpus.load_catalog(corpus.seed_catalog_path())
    train_set, val_set = corpus.split(corpus.flatten(catalog), 0.2, args.seed)
    vocab = featurizer.build_vocabulary(train_set)
    hp = embednet.Hyperparams(rng_seed=args.seed)
    model = embednet.init_model(vocab, hp)
    model, _ = embednet.train(model, embednet.encode_examples(train_set, vocab), hp)
    calibration = classifier.calibrate_threshold(model, val_set)
    threshold = calibration.threshold

    train_confs = [classifier.predict(model, ex.text).top[1] for ex in train_set]
    val_confs = [r.confidence for r in calibration.per_example if r.correct]
    fuzz = gibberish(random.Random(args.fuzz_seed), args.n)
    fuzz_confs = [classifier.predict(model, s).top[1] for s in fuzz]
    rate = float(np.mean([c < threshold for c in fuzz_confs]))

    print(f"threshold                 {threshold:+.4f}")
    print(f"train confidence          min {min(train_confs):+.4f}  mean {np.mean(train_confs):+.4f}")
    print(f"correct val confidence    min {min(val_confs):+.4f}  mean {np.mean(val_confs):+.4f}")
    print(f"gibberish confidence      max {max(fuzz_confs):+.4f}  mean {np.mean(fuzz_confs):+.4f}")
    print(f"safety margin             {threshold - max(fuzz_confs):+.4f}")
    print(f"fallback rate             {rate:.3f}  ({args.n} strings)")


if __name__ == "__main__":
    main()
