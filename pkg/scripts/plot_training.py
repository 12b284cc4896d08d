#!/usr/bin/env python3
"""Plot the loss curve from a training report JSON next to a model artifact."""

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("report", help="path to <model>.train.json")
    parser.add_argument("--out", default=None, help="output PNG (default: report path + .png)")
    args = parser.parse_args()

    report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    losses = report["loss_per_epoch"]

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, len(losses) + 1), losses, lw=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean margin-ranking loss")
    title = f"train accuracy {report['final_train_accuracy']:.3f}"
    if report.get("validation_accuracy") is not None:
        title += f", validation {report['validation_accuracy']:.3f}"
    ax.set_title(title)
    ax.grid(alpha=0.3)
    out = args.out or f"{args.report}.png"
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
