"""Shared embedding model over character n-grams.

Inputs pass through a summed gram-embedding layer and a relu layer into a
20-dimensional space where intent labels live as direct embeddings; training
pushes the cosine of true pairs above a positive margin and of sampled
negatives below a negative margin, by plain seeded SGD in float64.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import LabeledExample
from .featurizer import SparseVector, Vocabulary, featurize

MODEL_MAGIC = b"CBEM"
MODEL_FORMAT_VERSION = 1

_NORM_EPS = 1e-12


class ModelFormatError(ValueError):
    """Model file is corrupt, truncated or of an unsupported version."""


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during training."""


@dataclass(frozen=True)
class Hyperparams:
    dim_embed: int = 20
    dim_hidden: int = 128
    margin_pos: float = 0.8
    margin_neg: float = -0.4
    negatives_per_example: int = 10
    learning_rate: float = 0.01
    epochs: int = 300
    l2: float = 1e-6
    rng_seed: int = 42

    # the input tower is fixed: gram-sum layer + one relu layer
    n_hidden: int = field(default=2, init=False, repr=False)

    def __post_init__(self):
        if self.dim_embed <= 0 or self.dim_hidden <= 0:
            raise ValueError("embedding and hidden dimensions must be positive")
        if self.margin_pos <= self.margin_neg:
            raise ValueError("margin_pos must exceed margin_neg")
        if self.negatives_per_example < 1:
            raise ValueError("need at least one negative per example")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")


@dataclass
class EmbeddingModel:
    gram_table: np.ndarray   # (|V|, dim_hidden)
    W1: np.ndarray           # (dim_hidden, dim_hidden)
    b1: np.ndarray           # (dim_hidden,)
    W2: np.ndarray           # (dim_hidden, dim_embed)
    b2: np.ndarray           # (dim_embed,)
    label_table: np.ndarray  # (L, dim_embed)
    vocab: Vocabulary
    hyperparams: Hyperparams


@dataclass(frozen=True)
class TrainReport:
    loss_per_epoch: list[float]
    final_train_accuracy: float


def init_model(vocab: Vocabulary, hp: Hyperparams) -> EmbeddingModel:
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer."""
    if vocab.n_grams == 0 or vocab.n_tags == 0:
        raise ValueError("cannot initialize a model over an empty vocabulary")
    rng = np.random.default_rng(hp.rng_seed)
    V, H, E, L = vocab.n_grams, hp.dim_hidden, hp.dim_embed, vocab.n_tags

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    return EmbeddingModel(
        gram_table=uniform((V, H), V),
        W1=uniform((H, H), H),
        b1=uniform((H,), H),
        W2=uniform((H, E), H),
        b2=uniform((E,), H),
        label_table=uniform((L, E), L),
        vocab=vocab,
        hyperparams=hp,
    )


def _sparse_arrays(x: SparseVector) -> tuple[np.ndarray, np.ndarray]:
    if x.pairs:
        idx = np.fromiter((i for i, _ in x.pairs), dtype=np.int64, count=len(x.pairs))
        cnt = np.fromiter((c for _, c in x.pairs), dtype=np.float64, count=len(x.pairs))
    else:
        idx = np.empty(0, dtype=np.int64)
        cnt = np.empty(0, dtype=np.float64)
    return idx, cnt


def _forward(model: EmbeddingModel, idx: np.ndarray, cnt: np.ndarray):
    if idx.size:
        h0 = cnt @ model.gram_table[idx]
    else:
        h0 = np.zeros(model.gram_table.shape[1])
    pre1 = h0 @ model.W1 + model.b1
    h1 = np.maximum(pre1, 0.0)
    out = h1 @ model.W2 + model.b2
    return h0, pre1, h1, out


def embed_input(model: EmbeddingModel, x: SparseVector) -> np.ndarray:
    """Map a sparse gram-count vector into the shared embedding space."""
    if x.dimension != model.gram_table.shape[0]:
        raise ValueError(
            f"input dimension {x.dimension} != vocabulary size {model.gram_table.shape[0]}"
        )
    return _forward(model, *_sparse_arrays(x))[3]


def embed_label(model: EmbeddingModel, intent_index: int) -> np.ndarray:
    """Embedding of one intent label (a row of the label table)."""
    if not 0 <= intent_index < model.label_table.shape[0]:
        raise IndexError(f"intent index {intent_index} out of range")
    return model.label_table[intent_index].copy()


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity clamped to [-1, 1]; 0.0 for degenerate vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < _NORM_EPS or nb < _NORM_EPS:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def _check_negatives(true_index: int, negatives) -> np.ndarray:
    negs = np.asarray(list(negatives), dtype=np.int64)
    if negs.size == 0:
        raise ValueError("negatives must be non-empty")
    if np.any(negs == true_index):
        raise ValueError("negatives must not contain the true label")
    return negs


def _loss_and_raw_grads(model, idx, cnt, y, negs):
    """Shared forward/backward pass over one example and its sampled labels.

    Returns (loss, g_out, sel, g_rows, h0, pre1, h1) with g_out/g_rows the
    gradients w.r.t. the input embedding and the selected label rows.
    """
    hp = model.hyperparams
    h0, pre1, h1, out = _forward(model, idx, cnt)

    sel = np.concatenate(([y], negs))
    rows = model.label_table[sel]
    row_norms = np.linalg.norm(rows, axis=1)
    out_norm = np.linalg.norm(out)
    ok = (row_norms >= _NORM_EPS) & (out_norm >= _NORM_EPS)
    safe_out = max(out_norm, _NORM_EPS)
    denom = np.where(ok, row_norms * safe_out, 1.0)
    scores = np.clip(np.where(ok, rows @ out / denom, 0.0), -1.0, 1.0)

    # dL/ds: -1 on an active positive hinge, +1 on active negative hinges;
    # degenerate (near-zero-norm) pairs scored 0 contribute no gradient.
    coef = np.zeros_like(scores)
    total = max(0.0, hp.margin_pos - scores[0])
    if scores[0] < hp.margin_pos:
        coef[0] = -1.0
    neg_active = scores[1:] > hp.margin_neg
    total += float(np.sum((scores[1:] - hp.margin_neg)[neg_active]))
    coef[1:][neg_active] = 1.0
    coef = np.where(ok, coef, 0.0)

    g_out = (coef / denom) @ rows - (np.sum(coef * scores) / safe_out**2) * out
    g_rows = coef[:, None] * (
        out[None, :] / denom[:, None]
        - (scores / row_norms.clip(_NORM_EPS) ** 2)[:, None] * rows
    )
    return float(total), g_out, sel, g_rows, h0, pre1, h1


def loss(
    model: EmbeddingModel,
    example: tuple[SparseVector, int],
    negatives,
) -> float:
    """Margin ranking loss: hinge above margin_pos for the true label, hinge
    below margin_neg for each negative."""
    x, true_index = example
    negs = _check_negatives(true_index, negatives)
    idx, cnt = _sparse_arrays(x)
    return _loss_and_raw_grads(model, idx, cnt, true_index, negs)[0]


def loss_and_gradients(
    model: EmbeddingModel,
    example: tuple[SparseVector, int],
    negatives,
):
    """Loss plus analytic gradients for every touched parameter group.

    Returns (loss, grads) where grads has dense W1/b1/W2/b2 arrays and sparse
    row gradients {row_index: vector} for the gram and label tables.
    """
    x, true_index = example
    negs = _check_negatives(true_index, negatives)
    idx, cnt = _sparse_arrays(x)
    total, g_out, sel, g_rows, h0, pre1, h1 = _loss_and_raw_grads(
        model, idx, cnt, true_index, negs
    )
    g_h1 = model.W2 @ g_out
    g_pre1 = g_h1 * (pre1 > 0)
    g_h0 = model.W1 @ g_pre1
    grads = {
        "W1": np.outer(h0, g_pre1),
        "b1": g_pre1,
        "W2": np.outer(h1, g_out),
        "b2": g_out,
        "gram_rows": {int(i): cnt[k] * g_h0 for k, i in enumerate(idx)},
        "label_rows": {int(j): g_rows[k] for k, j in enumerate(sel)},
    }
    return total, grads


def encode_examples(
    examples: list[LabeledExample], vocab: Vocabulary
) -> list[tuple[SparseVector, int]]:
    """Featurize labeled text against a vocabulary for training/evaluation."""
    return [(featurize(ex.text, vocab), vocab.tag_to_index[ex.intent_id]) for ex in examples]


def train(
    model: EmbeddingModel,
    train_examples: list[tuple[SparseVector, int]],
    hp: Hyperparams | None = None,
) -> tuple[EmbeddingModel, TrainReport]:
    """Seeded SGD with uniform negative sampling and l2 decay on touched rows.

    Fully deterministic for a fixed hp.rng_seed; raises TrainingDiverged if
    the loss stops being finite.
    """
    if hp is not None:
        if hp.dim_hidden != model.W1.shape[0] or hp.dim_embed != model.W2.shape[1]:
            raise ValueError("hyperparameter dimensions do not match the model")
        model.hyperparams = hp
    hp = model.hyperparams
    L = model.label_table.shape[0]
    if L < 2:
        raise ValueError("training requires at least 2 distinct intents")
    if not train_examples:
        raise ValueError("empty training set")

    n_neg = min(hp.negatives_per_example, L - 1)
    rng = np.random.default_rng(hp.rng_seed)
    encoded = [(*_sparse_arrays(x), y) for x, y in train_examples]
    lr, l2 = hp.learning_rate, hp.l2
    all_labels = np.arange(L)

    loss_per_epoch: list[float] = []
    for epoch in range(hp.epochs):
        order = rng.permutation(len(encoded))
        epoch_loss = 0.0
        for pos in order:
            idx, cnt, y = encoded[pos]
            negs = rng.choice(np.delete(all_labels, y), size=n_neg, replace=False)
            step_loss, g_out, sel, g_rows, h0, pre1, h1 = _loss_and_raw_grads(
                model, idx, cnt, y, negs
            )
            if not np.isfinite(step_loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}, example {int(pos)}")

            g_h1 = model.W2 @ g_out
            g_pre1 = g_h1 * (pre1 > 0)
            g_h0 = model.W1 @ g_pre1
            model.b2 -= lr * (g_out + l2 * model.b2)
            model.W2 -= lr * (np.outer(h1, g_out) + l2 * model.W2)
            model.b1 -= lr * (g_pre1 + l2 * model.b1)
            model.W1 -= lr * (np.outer(h0, g_pre1) + l2 * model.W1)
            if idx.size:
                block = model.gram_table[idx]
                model.gram_table[idx] = block - lr * (cnt[:, None] * g_h0[None, :] + l2 * block)
            model.label_table[sel] -= lr * (g_rows + l2 * model.label_table[sel])
            epoch_loss += step_loss
        loss_per_epoch.append(epoch_loss / len(encoded))

    correct = sum(1 for idx, cnt, y in encoded if _predict_index(model, idx, cnt) == y)
    report = TrainReport(
        loss_per_epoch=loss_per_epoch,
        final_train_accuracy=correct / len(encoded),
    )
    return model, report


def _predict_index(model: EmbeddingModel, idx: np.ndarray, cnt: np.ndarray) -> int:
    scores = _scores_against_labels(model, _forward(model, idx, cnt)[3])
    return int(np.argmax(scores))  # ties resolve to the lowest tag index


def _scores_against_labels(model: EmbeddingModel, out: np.ndarray) -> np.ndarray:
    """Clamped cosine of one input embedding against every label row."""
    out_norm = np.linalg.norm(out)
    row_norms = np.linalg.norm(model.label_table, axis=1)
    ok = (row_norms >= _NORM_EPS) & (out_norm >= _NORM_EPS)
    denom = np.where(ok, row_norms * max(out_norm, _NORM_EPS), 1.0)
    return np.clip(np.where(ok, model.label_table @ out / denom, 0.0), -1.0, 1.0)


# --- model artifact -------------------------------------------------------
#
# magic | uint32 version | uint64 header length | JSON header
# (hyperparams, vocabulary, tensor shapes) | raw little-endian float64
# tensors in header order | sha256 of everything before it.

_TENSOR_FIELDS = ("gram_table", "W1", "b1", "W2", "b2", "label_table")


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    """Write the versioned, checksummed model artifact."""
    hp = asdict(model.hyperparams)
    hp.pop("n_hidden", None)
    header = {
        "hyperparams": hp,
        "vocab": {
            "gram_to_index": model.vocab.gram_to_index,
            "tag_to_index": model.vocab.tag_to_index,
            "n_min": model.vocab.n_min,
            "n_max": model.vocab.n_max,
        },
        "tensors": [[name, list(getattr(model, name).shape)] for name in _TENSOR_FIELDS],
        "dtype": "<f8",
    }
    header_bytes = json.dumps(header, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    blob = bytearray()
    blob += MODEL_MAGIC
    blob += struct.pack("<I", MODEL_FORMAT_VERSION)
    blob += struct.pack("<Q", len(header_bytes))
    blob += header_bytes
    for name in _TENSOR_FIELDS:
        blob += np.ascontiguousarray(getattr(model, name), dtype="<f8").tobytes()
    blob += hashlib.sha256(blob).digest()
    Path(path).write_bytes(bytes(blob))


def load_model(path: str | Path) -> EmbeddingModel:
    """Read a model artifact; verifies magic, version and whole-file checksum."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 + 4 + 8 + 32 or raw[:4] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a model artifact")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported model format version {version} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    if hashlib.sha256(raw[:-32]).digest() != raw[-32:]:
        raise ModelFormatError(f"{path}: checksum mismatch (truncated or corrupted file)")
    (header_len,) = struct.unpack_from("<Q", raw, 8)
    header_start = 16
    header = json.loads(raw[header_start : header_start + header_len].decode("utf-8"))

    hp = Hyperparams(**header["hyperparams"])
    v = header["vocab"]
    vocab = Vocabulary(
        gram_to_index={g: int(i) for g, i in v["gram_to_index"].items()},
        tag_to_index={t: int(i) for t, i in v["tag_to_index"].items()},
        n_min=int(v["n_min"]),
        n_max=int(v["n_max"]),
    )
    tensors = {}
    offset = header_start + header_len
    for name, shape in header["tensors"]:
        size = int(np.prod(shape)) * 8
        arr = np.frombuffer(raw[offset : offset + size], dtype="<f8").reshape(shape)
        tensors[name] = arr.astype(np.float64)
        offset += size
    if offset != len(raw) - 32:
        raise ModelFormatError(f"{path}: payload size does not match header")
    return EmbeddingModel(vocab=vocab, hyperparams=hp, **tensors)
