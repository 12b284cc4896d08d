"""Intent prediction with confidence, and rejection-threshold calibration.

Confidence is the raw cosine similarity between the utterance embedding and a
label embedding, so values live in [-1, 1], not [0, 1]. The threshold is the
minimum confidence among correctly predicted validation questions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import LabeledExample
from .embednet import EmbeddingModel, _forward, _scores_against_labels, _sparse_arrays
from .featurizer import featurize


class UncalibratableError(RuntimeError):
    """No validation example was predicted correctly; the threshold formula
    (a minimum over correct examples) is undefined."""


@dataclass(frozen=True)
class Prediction:
    """All intents ranked by confidence descending, ties by tag index."""

    ranked: tuple[tuple[str, float], ...]

    @property
    def top(self) -> tuple[str, float]:
        return self.ranked[0]


@dataclass(frozen=True)
class CalibrationRow:
    text: str
    true_intent: str
    predicted_intent: str
    confidence: float
    correct: bool


@dataclass(frozen=True)
class CalibrationReport:
    threshold: float
    per_example: tuple[CalibrationRow, ...]
    n_correct: int


def predict(model: EmbeddingModel, text: str) -> Prediction:
    """Rank every known intent by cosine confidence for one utterance."""
    x = featurize(text, model.vocab)
    idx, cnt = _sparse_arrays(x)
    scores = _scores_against_labels(model, _forward(model, idx, cnt)[3])
    tags = model.vocab.tags()
    order = sorted(range(len(tags)), key=lambda i: (-scores[i], i))
    return Prediction(ranked=tuple((tags[i], float(scores[i])) for i in order))


def calibrate_threshold(
    model: EmbeddingModel, validation: list[LabeledExample]
) -> CalibrationReport:
    """Threshold = min top-1 confidence over correctly predicted examples."""
    if not validation:
        raise ValueError("validation set must be non-empty")
    rows = []
    for ex in validation:
        top_intent, confidence = predict(model, ex.text).top
        rows.append(
            CalibrationRow(
                text=ex.text,
                true_intent=ex.intent_id,
                predicted_intent=top_intent,
                confidence=confidence,
                correct=top_intent == ex.intent_id,
            )
        )
    correct_confidences = [r.confidence for r in rows if r.correct]
    if not correct_confidences:
        raise UncalibratableError(
            "no validation example was predicted correctly; cannot calibrate"
        )
    return CalibrationReport(
        threshold=min(correct_confidences),
        per_example=tuple(rows),
        n_correct=len(correct_confidences),
    )


def evaluate_accuracy(model: EmbeddingModel, dataset: list[LabeledExample]) -> float:
    """Fraction of examples whose top prediction matches the label."""
    if not dataset:
        raise ValueError("dataset must be non-empty")
    hits = sum(1 for ex in dataset if predict(model, ex.text).top[0] == ex.intent_id)
    return hits / len(dataset)


def write_calibration_report(report: CalibrationReport, path) -> None:
    """Tab-separated report, one row per validation example.

    Summary lines are '#'-prefixed; `serve --calibration` reads the threshold
    back from the '# threshold' line.
    """
    def esc(s: str) -> str:
        return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")

    lines = [
        f"# threshold\t{report.threshold!r}",
        f"# n_correct\t{report.n_correct}",
        "text\ttrue_intent\tpredicted_intent\tconfidence\tcorrect",
    ]
    for r in report.per_example:
        lines.append(
            f"{esc(r.text)}\t{r.true_intent}\t{r.predicted_intent}"
            f"\t{r.confidence!r}\t{int(r.correct)}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_calibration_threshold(path) -> float:
    """Recover the threshold from a written calibration report."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# threshold\t"):
                return float(line.split("\t", 1)[1])
    raise ValueError(f"{path}: no '# threshold' line found")
