"""Data layer: durable conversation log, unanswered-questions file, usage stats.

Storage is a single embedded sqlite file plus an append-only TSV for
unanswered questions; timestamps are RFC 3339 UTC throughout.
"""

from __future__ import annotations

import sqlite3
import threading
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

_SCHEMA = """
CREATE TABLE IF NOT EXISTS turns (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id TEXT NOT NULL,
    channel TEXT NOT NULL,
    ts TEXT NOT NULL,
    user_text TEXT NOT NULL,
    reply_kind TEXT NOT NULL,
    intent_id TEXT,
    confidence REAL NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_turns_session ON turns(session_id);
"""


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def rfc3339(dt: datetime) -> str:
    """Canonical UTC RFC 3339 form; naive datetimes are taken as UTC."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat()


def parse_rfc3339(s: str) -> datetime:
    dt = datetime.fromisoformat(s.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _escape(s: str) -> str:
    return (
        s.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


@dataclass(frozen=True)
class Turn:
    timestamp: str
    user_text: str
    reply_kind: str
    intent_id: str | None
    confidence: float


@dataclass(frozen=True)
class ConversationRecord:
    session_id: str
    channel: str
    turns: tuple[Turn, ...]


@dataclass(frozen=True)
class UsageStats:
    unique_users: int
    total_questions: int
    min_q_per_conv: int
    max_q_per_conv: int
    avg_q_per_conv: float
    stickiness: float
    dau: int
    mau: int


class ConversationStore:
    """Single-writer store over one data directory; all methods are
    serialized by an internal lock, so one instance is thread-safe."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.db_path = self.data_dir / "conversations.sqlite3"
        self.unanswered_path = self.data_dir / "unanswered.log"
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(str(self.db_path), check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- writes ------------------------------------------------------------

    def record_turn(
        self,
        session_id: str,
        *,
        user_text: str,
        reply_kind: str,
        confidence: float,
        intent_id: str | None = None,
        channel: str = "web",
        timestamp: str | None = None,
    ) -> None:
        """Durably append one turn; visible to subsequent reads and stats."""
        ts = timestamp if timestamp is not None else rfc3339(utc_now())
        with self._lock:
            self._conn.execute(
                "INSERT INTO turns (session_id, channel, ts, user_text, reply_kind,"
                " intent_id, confidence) VALUES (?,?,?,?,?,?,?)",
                (session_id, channel, ts, user_text, reply_kind, intent_id, confidence),
            )
            self._conn.commit()

    def record_turns(self, rows: list[tuple[str, str, str, str, str, str | None, float]]) -> None:
        """Bulk insert of (session_id, channel, ts, user_text, reply_kind,
        intent_id, confidence) rows in one transaction; fixture/import path."""
        with self._lock:
            self._conn.executemany(
                "INSERT INTO turns (session_id, channel, ts, user_text, reply_kind,"
                " intent_id, confidence) VALUES (?,?,?,?,?,?,?)",
                rows,
            )
            self._conn.commit()

    def append_unanswered(self, text: str, timestamp: str | None = None, channel: str = "web") -> None:
        """Append one escaped `timestamp<TAB>channel<TAB>text` line."""
        ts = timestamp if timestamp is not None else rfc3339(utc_now())
        line = f"{_escape(ts)}\t{_escape(channel)}\t{_escape(text)}\n"
        with self._lock:
            with open(self.unanswered_path, "a", encoding="utf-8") as fh:
                fh.write(line)

    # -- reads ---------------------------------------------------------------

    def get_conversation(self, session_id: str) -> ConversationRecord | None:
        with self._lock:
            rows = self._conn.execute(
                "SELECT channel, ts, user_text, reply_kind, intent_id, confidence"
                " FROM turns WHERE session_id = ? ORDER BY id",
                (session_id,),
            ).fetchall()
        if not rows:
            return None
        return ConversationRecord(
            session_id=session_id,
            channel=rows[0][0],
            turns=tuple(Turn(ts, text, kind, intent, conf) for _, ts, text, kind, intent, conf in rows),
        )

    def conversations(self) -> list[ConversationRecord]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT session_id, channel, ts, user_text, reply_kind, intent_id,"
                " confidence FROM turns ORDER BY id"
            ).fetchall()
        by_session: dict[str, list] = {}
        channels: dict[str, str] = {}
        for sid, channel, ts, text, kind, intent, conf in rows:
            by_session.setdefault(sid, []).append(Turn(ts, text, kind, intent, conf))
            channels.setdefault(sid, channel)
        return [
            ConversationRecord(session_id=sid, channel=channels[sid], turns=tuple(turns))
            for sid, turns in by_session.items()
        ]

    def unanswered_lines(self) -> list[str]:
        if not self.unanswered_path.exists():
            return []
        return self.unanswered_path.read_text(encoding="utf-8").splitlines()

    # -- analytics -----------------------------------------------------------

    def usage_stats(
        self,
        t0: datetime,
        t1: datetime,
        day: date | None = None,
        month_start: date | None = None,
    ) -> UsageStats:
        """Aggregate user-turn counts over [t0, t1) and DAU/MAU stickiness.

        `day` (default: last UTC day inside the range) selects DAU;
        `month_start` opens the 30-day MAU window and must contain `day`.
        Unique users are approximated by distinct session ids.
        """
        if t0 >= t1:
            raise ValueError("invalid range: t0 must precede t1")
        if day is None:
            day = (t1 - timedelta(microseconds=1)).astimezone(timezone.utc).date()
        if month_start is None:
            month_start = day - timedelta(days=29)
        month_end = month_start + timedelta(days=30)
        if not month_start <= day < month_end:
            raise ValueError("DAU day must fall inside the 30-day MAU window")

        with self._lock:
            rows = self._conn.execute("SELECT session_id, ts FROM turns").fetchall()

        per_conv: dict[str, int] = {}
        day_active: set[str] = set()
        month_active: set[str] = set()
        for sid, ts in rows:
            when = parse_rfc3339(ts)
            if t0 <= when < t1:
                per_conv[sid] = per_conv.get(sid, 0) + 1
            d = when.date()
            if d == day:
                day_active.add(sid)
            if month_start <= d < month_end:
                month_active.add(sid)

        counts = list(per_conv.values())
        total = sum(counts)
        dau, mau = len(day_active), len(month_active)
        return UsageStats(
            unique_users=len(per_conv),
            total_questions=total,
            min_q_per_conv=min(counts) if counts else 0,
            max_q_per_conv=max(counts) if counts else 0,
            avg_q_per_conv=total / len(counts) if counts else 0.0,
            stickiness=dau / mau if mau else 0.0,
            dau=dau,
            mau=mau,
        )
