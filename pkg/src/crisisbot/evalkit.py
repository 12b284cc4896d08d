"""Sensibleness/Specificity Average over human judge labels.

Judgment files are UTF-8 TSV: conversation_id, turn_index, judge_id,
sensible, specific (booleans as 0/1). A response's label is the majority
vote across judges; ties count as negative.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from pathlib import Path

from .datastore import ConversationRecord

logger = logging.getLogger(__name__)

JUDGMENT_HEADER = ("conversation_id", "turn_index", "judge_id", "sensible", "specific")


@dataclass(frozen=True)
class Judgment:
    conversation_id: str
    turn_index: int
    judge_id: str
    sensible: bool
    specific: bool


@dataclass(frozen=True)
class SsaReport:
    sensibleness: float
    specificity: float
    ssa: float
    n_responses: int
    n_judges: int


def _parse_bool(token: str, row: int, column: str) -> bool:
    if token == "1":
        return True
    if token == "0":
        return False
    raise ValueError(f"row {row}: column {column!r} must be 0 or 1, got {token!r}")


def ingest_judgments(path: str | Path) -> list[Judgment]:
    """Parse a judgment file; rows marked specific-but-not-sensible are
    coerced to not specific (a warning reports how many)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        return []
    if tuple(lines[0].split("\t")) != JUDGMENT_HEADER:
        raise ValueError(f"row 1: expected header {' '.join(JUDGMENT_HEADER)!r}")
    judgments: list[Judgment] = []
    coerced = 0
    for row, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise ValueError(f"row {row}: expected 5 tab-separated fields, got {len(fields)}")
        conv_id, turn_str, judge_id, sens_str, spec_str = fields
        try:
            turn_index = int(turn_str)
        except ValueError:
            raise ValueError(f"row {row}: turn_index must be an integer, got {turn_str!r}") from None
        sensible = _parse_bool(sens_str, row, "sensible")
        specific = _parse_bool(spec_str, row, "specific")
        if specific and not sensible:
            specific = False
            coerced += 1
        judgments.append(Judgment(conv_id, turn_index, judge_id, sensible, specific))
    if coerced:
        logger.warning(
            "%d judgment row(s) violated specific=>sensible and were coerced to not specific",
            coerced,
        )
    return judgments


def ssa(judgments: list[Judgment]) -> SsaReport:
    """Majority-vote sensibleness and specificity fractions and their mean."""
    if not judgments:
        raise ValueError("no judgments to aggregate")
    votes: dict[tuple[str, int], list[Judgment]] = {}
    judges = set()
    for j in judgments:
        votes.setdefault((j.conversation_id, j.turn_index), []).append(j)
        judges.add(j.judge_id)

    n_sensible = 0
    n_specific = 0
    for cast in votes.values():
        n = len(cast)
        if 2 * sum(j.sensible for j in cast) > n:
            n_sensible += 1
        if 2 * sum(j.specific for j in cast) > n:
            n_specific += 1

    n_responses = len(votes)
    sensibleness = n_sensible / n_responses
    specificity = n_specific / n_responses
    return SsaReport(
        sensibleness=sensibleness,
        specificity=specificity,
        ssa=(sensibleness + specificity) / 2,
        n_responses=n_responses,
        n_judges=len(judges),
    )


def sample_conversations(
    records: list[ConversationRecord], n: int, min_turns: int = 1, seed: int = 42
) -> list[ConversationRecord]:
    """Seeded random draw of n conversations with at least min_turns turns."""
    eligible = [r for r in records if len(r.turns) >= min_turns]
    rng = random.Random(seed)
    if len(eligible) <= n:
        return eligible
    return rng.sample(eligible, n)


def write_labeling_sheet(records: list[ConversationRecord], path: str | Path) -> None:
    """Readable TSV of sampled turns for judges; judges then produce the
    judgment file in the JUDGMENT_HEADER format."""
    def esc(s: str) -> str:
        return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")

    lines = ["conversation_id\tturn_index\tuser_text\treply_kind\tintent_id"]
    for rec in records:
        for i, turn in enumerate(rec.turns):
            lines.append(
                f"{rec.session_id}\t{i}\t{esc(turn.user_text)}\t{turn.reply_kind}"
                f"\t{turn.intent_id or ''}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
