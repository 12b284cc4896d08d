"""Intent catalog: loading, validation, flattening and train/validation splits.

The catalog is a single UTF-8 YAML file with top-level keys
``language_groups``, ``fallbacks`` and ``intents``; see README for the schema.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import yaml

INTENT_ID_RE = re.compile(r"^[a-z0-9_.-]+$")

_BOMS = (b"\xef\xbb\xbf", b"\xff\xfe", b"\xfe\xff")


class CatalogError(ValueError):
    """Raised for unreadable, unparsable or invariant-violating catalogs."""


class Category(str, Enum):
    FAQ = "faq"
    CHITCHAT = "chitchat"


@dataclass(frozen=True)
class LanguageGroup:
    """A bundle of question dialects that share one reply language."""

    id: str
    reply_language: str


@dataclass(frozen=True)
class IntentEntry:
    intent_id: str
    category: Category
    language_group: str
    questions: tuple[str, ...]
    answer: str
    external_service: str | None = None


@dataclass(frozen=True)
class IntentCatalog:
    groups: dict[str, LanguageGroup]
    entries: tuple[IntentEntry, ...]
    fallback_messages: dict[str, str]

    def entry(self, intent_id: str) -> IntentEntry:
        for e in self.entries:
            if e.intent_id == intent_id:
                return e
        raise KeyError(f"unknown intent id {intent_id!r}")

    def intent_ids(self) -> list[str]:
        return [e.intent_id for e in self.entries]


@dataclass(frozen=True)
class LabeledExample:
    text: str
    intent_id: str


def load_catalog(path: str | Path) -> IntentCatalog:
    """Load and validate a catalog file, preserving entry order.

    Raises CatalogError on I/O failure, parse failure (with line/column) or
    invariant violations; all offending entries are listed at once.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CatalogError(f"cannot read catalog {path}: {exc}") from exc
    for bom in _BOMS:
        if raw.startswith(bom):
            raise CatalogError(f"{path}: byte-order mark not allowed")
    try:
        doc = yaml.safe_load(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise CatalogError(f"{path}: not valid UTF-8: {exc}") from exc
    except yaml.YAMLError as exc:
        where = ""
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            where = f" at line {mark.line + 1}, column {mark.column + 1}"
        raise CatalogError(f"{path}: parse failure{where}: {exc}") from exc
    if not isinstance(doc, dict):
        raise CatalogError(f"{path}: parse failure: expected a mapping at top level")
    return _build_catalog(doc, source=str(path))


def _build_catalog(doc: dict, source: str) -> IntentCatalog:
    problems: list[str] = []

    groups_raw = doc.get("language_groups")
    groups: dict[str, LanguageGroup] = {}
    if not isinstance(groups_raw, dict) or not groups_raw:
        problems.append("language_groups: required non-empty mapping of id -> reply language")
        groups_raw = {}
    for gid, reply in groups_raw.items():
        gid = str(gid)
        if not isinstance(reply, str) or not reply.strip():
            problems.append(f"language_groups[{gid}]: reply_language must be a non-empty string")
            continue
        groups[gid] = LanguageGroup(id=gid, reply_language=reply)

    fallbacks_raw = doc.get("fallbacks") or {}
    if not isinstance(fallbacks_raw, dict):
        problems.append("fallbacks: must be a mapping of language group id -> message")
        fallbacks_raw = {}
    fallbacks = {str(k): str(v) for k, v in fallbacks_raw.items()}

    entries_raw = doc.get("intents")
    if not isinstance(entries_raw, list):
        problems.append("intents: required list of intent entries")
        entries_raw = []

    entries: list[IntentEntry] = []
    for i, item in enumerate(entries_raw):
        loc = f"intents[{i}]"
        if not isinstance(item, dict):
            problems.append(f"{loc}: expected a mapping")
            continue
        intent_id = str(item.get("id", ""))
        if not INTENT_ID_RE.match(intent_id):
            problems.append(f"{loc}: id {intent_id!r} must match [a-z0-9_.-]+")
        try:
            category = Category(str(item.get("category", "")))
        except ValueError:
            problems.append(f"{loc} ({intent_id}): category must be 'faq' or 'chitchat'")
            category = Category.FAQ
        group = str(item.get("language_group", ""))
        if group not in groups:
            problems.append(f"{loc} ({intent_id}): unknown language_group {group!r}")
        questions_raw = item.get("questions")
        questions: tuple[str, ...] = ()
        if not isinstance(questions_raw, list) or not questions_raw:
            problems.append(f"{loc} ({intent_id}): questions must be a non-empty list")
        else:
            questions = tuple(str(q) for q in questions_raw)
            for j, q in enumerate(questions):
                if not q.strip():
                    problems.append(f"{loc} ({intent_id}): questions[{j}] is empty")
        answer = str(item.get("answer", ""))
        if not answer.strip():
            problems.append(f"{loc} ({intent_id}): answer must be non-empty")
        service = item.get("external_service")
        entries.append(
            IntentEntry(
                intent_id=intent_id,
                category=category,
                language_group=group,
                questions=questions,
                answer=answer,
                external_service=None if service is None else str(service),
            )
        )

    seen: dict[str, list[int]] = {}
    for i, e in enumerate(entries):
        seen.setdefault(e.intent_id, []).append(i)
    for intent_id, where in seen.items():
        if len(where) > 1:
            for i in where:
                problems.append(f"intents[{i}]: duplicate intent id {intent_id!r}")

    for gid in sorted({e.language_group for e in entries} & set(groups)):
        if gid not in fallbacks:
            problems.append(f"fallbacks: missing fallback message for language group {gid!r}")

    if len(seen) < 2:
        problems.append("intents: at least 2 distinct intents required")

    if problems:
        raise CatalogError(f"{source}: invalid catalog:\n" + "\n".join(f"  - {p}" for p in problems))
    return IntentCatalog(groups=groups, entries=tuple(entries), fallback_messages=fallbacks)


def save_catalog(catalog: IntentCatalog, path: str | Path) -> None:
    """Write a catalog back to YAML; load_catalog(save_catalog(c)) round-trips."""
    doc: dict = {
        "language_groups": {g.id: g.reply_language for g in catalog.groups.values()},
        "fallbacks": dict(catalog.fallback_messages),
        "intents": [],
    }
    for e in catalog.entries:
        item: dict = {
            "id": e.intent_id,
            "category": e.category.value,
            "language_group": e.language_group,
            "questions": list(e.questions),
            "answer": e.answer,
        }
        if e.external_service is not None:
            item["external_service"] = e.external_service
        doc["intents"].append(item)
    text = yaml.safe_dump(doc, allow_unicode=True, sort_keys=False, width=1000)
    Path(path).write_text(text, encoding="utf-8")


def flatten(catalog: IntentCatalog) -> list[LabeledExample]:
    """One LabeledExample per (question, intent) pair, in catalog order."""
    return [
        LabeledExample(text=q, intent_id=e.intent_id)
        for e in catalog.entries
        for q in e.questions
    ]


def split(
    examples: list[LabeledExample],
    validation_fraction: float = 0.2,
    seed: int = 42,
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Deterministic stratified split into (train, validation).

    Per intent with k >= 2 examples, floor(k * fraction) examples go to
    validation, always leaving at least one in train; singleton intents stay
    in train. Input order is preserved within each part.
    """
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError(f"validation_fraction must be in (0,1), got {validation_fraction}")
    if len(examples) < 2:
        raise ValueError("need at least 2 examples to split")

    by_intent: dict[str, list[int]] = {}
    for i, ex in enumerate(examples):
        by_intent.setdefault(ex.intent_id, []).append(i)

    rng = random.Random(seed)
    val_indices: set[int] = set()
    for intent_id in sorted(by_intent):
        idxs = list(by_intent[intent_id])
        k = len(idxs)
        n_val = min(math.floor(k * validation_fraction), k - 1)
        if n_val <= 0:
            continue
        rng.shuffle(idxs)
        val_indices.update(idxs[:n_val])

    train = [ex for i, ex in enumerate(examples) if i not in val_indices]
    validation = [ex for i, ex in enumerate(examples) if i in val_indices]
    return train, validation


def category_counts(catalog: IntentCatalog) -> dict[str, tuple[int, int]]:
    """Per language group: (number of FAQ intents, number of chitchat intents)."""
    counts = {gid: [0, 0] for gid in catalog.groups}
    for e in catalog.entries:
        slot = 0 if e.category is Category.FAQ else 1
        counts[e.language_group][slot] += 1
    return {gid: (faq, chat) for gid, (faq, chat) in counts.items()}


def seed_catalog_path() -> Path:
    """Path of the catalog shipped with the package."""
    return Path(__file__).parent / "data" / "seed_catalog.yaml"
