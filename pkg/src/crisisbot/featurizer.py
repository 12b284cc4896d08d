"""Text features: normalization, character n-gram bags and sparse encoding.

Characters are Unicode scalar values throughout; whitespace stays inside
n-grams so sub-word signal crosses word boundaries (the dialects served here
have no writing standards, so no tokenizer is assumed).
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass

from .corpus import LabeledExample

# Harakat, Quranic annotation marks and tatweel; stripped to reduce sparsity
# for MSA/Derja. Arabic-Indic and extended Arabic-Indic digits map to ASCII.
_ARABIC_MARKS_RE = re.compile(r"[ؐ-ًؚ-ٰٟۖ-ۭـ]")
_ARABIC_DIGITS = str.maketrans("٠١٢٣٤٥٦٧٨٩"
                               "۰۱۲۳۴۵۶۷۸۹",
                               "01234567890123456789")
# \s would also match the C0 information separators \x1c-\x1f; those are
# control characters to remove, not whitespace to collapse.
_WHITESPACE_RE = re.compile(r"[^\S\x1c-\x1f]")
_MULTISPACE_RE = re.compile(r" {2,}")


def normalize(text: str, *, strip_arabic_marks: bool = True, map_arabic_digits: bool = True) -> str:
    """Canonical lowercased form of an utterance; idempotent.

    NFC, lowercase, optional Arabic diacritic stripping and digit mapping,
    every whitespace run collapsed to one space, control/format characters
    removed, surrounding whitespace stripped.
    """
    s = unicodedata.normalize("NFC", text)
    s = s.lower()
    if strip_arabic_marks:
        s = _ARABIC_MARKS_RE.sub("", s)
    if map_arabic_digits:
        s = s.translate(_ARABIC_DIGITS)
    s = _WHITESPACE_RE.sub(" ", s)
    s = "".join(ch for ch in s if unicodedata.category(ch) not in ("Cc", "Cf"))
    s = _MULTISPACE_RE.sub(" ", s).strip()
    return unicodedata.normalize("NFC", s)


@dataclass(frozen=True)
class FeatureBag:
    """Multiset of character n-grams with the n range that produced it."""

    grams: dict[str, int]
    n_min: int
    n_max: int

    def total_mass(self) -> int:
        return sum(self.grams.values())


def char_ngrams(text: str, n_min: int = 2, n_max: int = 4) -> FeatureBag:
    """All contiguous substrings of length n in [n_min, n_max], with counts."""
    if n_min < 1 or n_min > n_max:
        raise ValueError(f"invalid n-gram range [{n_min}, {n_max}]")
    counts: Counter[str] = Counter()
    m = len(text)
    for n in range(n_min, n_max + 1):
        for i in range(m - n + 1):
            counts[text[i : i + n]] += 1
    return FeatureBag(grams=dict(counts), n_min=n_min, n_max=n_max)


@dataclass(frozen=True)
class Vocabulary:
    """Dense gram and tag indexes, built from training data only."""

    gram_to_index: dict[str, int]
    tag_to_index: dict[str, int]
    n_min: int = 2
    n_max: int = 4

    @property
    def n_grams(self) -> int:
        return len(self.gram_to_index)

    @property
    def n_tags(self) -> int:
        return len(self.tag_to_index)

    def tags(self) -> list[str]:
        """Intent ids ordered by tag index."""
        return sorted(self.tag_to_index, key=self.tag_to_index.__getitem__)


def build_vocabulary(
    train: list[LabeledExample],
    min_count: int = 1,
    n_min: int = 2,
    n_max: int = 4,
) -> Vocabulary:
    """Index training n-grams by (count desc, gram asc); tags by first appearance."""
    if not train:
        raise ValueError("empty training set")
    gram_counts: Counter[str] = Counter()
    tag_to_index: dict[str, int] = {}
    for ex in train:
        gram_counts.update(char_ngrams(normalize(ex.text), n_min, n_max).grams)
        if ex.intent_id not in tag_to_index:
            tag_to_index[ex.intent_id] = len(tag_to_index)
    kept = sorted(
        (g for g, c in gram_counts.items() if c >= min_count),
        key=lambda g: (-gram_counts[g], g),
    )
    return Vocabulary(
        gram_to_index={g: i for i, g in enumerate(kept)},
        tag_to_index=tag_to_index,
        n_min=n_min,
        n_max=n_max,
    )


@dataclass(frozen=True)
class SparseVector:
    """Indexed n-gram counts; indices strictly increasing, values positive."""

    pairs: tuple[tuple[int, int], ...]
    dimension: int


def encode(bag: FeatureBag, vocab: Vocabulary) -> SparseVector:
    """Index a bag against the vocabulary; out-of-vocabulary grams are dropped."""
    if vocab.n_grams == 0:
        raise ValueError("cannot encode against a zero-dimension vocabulary")
    pairs = sorted(
        (vocab.gram_to_index[g], c)
        for g, c in bag.grams.items()
        if g in vocab.gram_to_index
    )
    return SparseVector(pairs=tuple(pairs), dimension=vocab.n_grams)


def featurize(text: str, vocab: Vocabulary) -> SparseVector:
    """normalize -> char_ngrams -> encode, the standard inference path."""
    return encode(char_ngrams(normalize(text), vocab.n_min, vocab.n_max), vocab)
