"""Presentation/NLP layers: HTTP API, text sanitization, platform webhooks.

Endpoints: POST /v1/messages, GET /v1/health, POST /v1/webhook/{platform}.
All bodies are UTF-8 JSON; the engine only ever sees sanitized plain text.
"""

from __future__ import annotations

import hashlib
import re
import threading
import time
import unicodedata
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .datastore import rfc3339, utc_now
from .dialogue import Engine, Session, handle_message
from .embednet import MODEL_FORMAT_VERSION

SESSION_ID_RE = re.compile(r"^[A-Za-z0-9-]{1,64}$")
MAX_TEXT_SCALARS = 2000

_TAG_RE = re.compile(r"<[^>]*>")


def sanitize(text: str) -> str:
    """Strip markup tags and control/format characters; idempotent."""
    s = _TAG_RE.sub("", text)
    return "".join(ch for ch in s if unicodedata.category(ch) not in ("Cc", "Cf"))


class MessengerSimulator:
    """In-repo stand-in for a messaging platform: collects delivered replies."""

    def __init__(self):
        self.outbox: list[tuple[str, dict]] = []

    def deliver(self, sender_id: str, reply: dict) -> None:
        self.outbox.append((sender_id, reply))


def _derived_session_id(platform: str, sender_id: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9-]", "", sender_id)
    if not cleaned:
        cleaned = hashlib.sha256(sender_id.encode("utf-8")).hexdigest()[:16]
    prefix = re.sub(r"[^A-Za-z0-9-]", "", platform) or "platform"
    return f"{prefix}-{cleaned}"[:64]


def create_app(
    engine: Engine | None = None,
    *,
    webhook_secret: str | None = None,
    adapters: dict | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the gateway app around an assembled engine.

    With engine=None the app starts in the 'loading' state and answers 503 to
    messages. `adapters` maps platform name -> object with deliver(sender_id,
    reply_dict); the messenger simulator satisfies that contract.
    """
    app = FastAPI(title="crisisbot gateway")
    app.state.engine = engine
    app.state.webhook_secret = webhook_secret
    app.state.adapters = adapters or {}
    app.state.sessions = {}
    app.state.session_locks = {}
    app.state.registry_lock = threading.Lock()
    app.state.started = time.monotonic()

    def _handle(session_id: str, text: str, channel: str) -> dict:
        state = app.state
        with state.registry_lock:
            lock = state.session_locks.setdefault(session_id, threading.Lock())
        with lock:  # per-session ordering; engine itself is read-only shared
            session = state.sessions.get(session_id)
            if session is None:
                session = Session(session_id=session_id, channel=channel)
                state.sessions[session_id] = session
            clean = sanitize(text)
            reply = handle_message(session, clean, state.engine)
            store = state.engine.store
            if store is not None:
                store.record_turn(
                    session_id,
                    user_text=clean,
                    reply_kind=reply.kind,
                    intent_id=reply.intent_id,
                    confidence=reply.confidence,
                    channel=channel,
                )
        return {
            "session_id": session_id,
            "kind": reply.kind,
            "text": reply.text,
            "intent_id": reply.intent_id,
            "confidence": reply.confidence,
            "language_group": reply.language_group,
            "timestamp": rfc3339(utc_now()),
        }

    def _validate_message(body) -> tuple[int, str] | None:
        if not isinstance(body, dict):
            return 400, "body must be a JSON object"
        session_id = body.get("session_id")
        if not isinstance(session_id, str) or not SESSION_ID_RE.match(session_id):
            return 400, "session_id must match [A-Za-z0-9-]{1,64}"
        text = body.get("text")
        if not isinstance(text, str):
            return 400, "text must be a string"
        if len(text) > MAX_TEXT_SCALARS:
            return 413, f"text exceeds {MAX_TEXT_SCALARS} characters"
        channel = body.get("channel", "web")
        if not isinstance(channel, str):
            return 400, "channel must be a string"
        timestamp = body.get("timestamp")
        if timestamp is not None and not isinstance(timestamp, str):
            return 400, "timestamp must be an RFC 3339 string"
        return None

    @app.post("/v1/messages")
    async def post_message(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "malformed JSON body"}, status_code=400)
        problem = _validate_message(body)
        if problem is not None:
            return JSONResponse({"error": problem[1]}, status_code=problem[0])
        if app.state.engine is None:
            return JSONResponse({"error": "engine not loaded"}, status_code=503)
        doc = await run_in_threadpool(
            _handle, body["session_id"], body["text"], body.get("channel", "web")
        )
        return doc

    @app.get("/v1/health")
    def health():
        engine = app.state.engine
        uptime = time.monotonic() - app.state.started
        if engine is None:
            return {"status": "loading", "model_version": None, "threshold": None,
                    "uptime_seconds": uptime}
        return {
            "status": "ready",
            "model_version": MODEL_FORMAT_VERSION,
            "threshold": engine.threshold,
            "uptime_seconds": uptime,
        }

    @app.post("/v1/webhook/{platform}")
    async def webhook(platform: str, request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "malformed JSON body"}, status_code=400)
        if not isinstance(body, dict):
            return JSONResponse({"error": "body must be a JSON object"}, status_code=400)
        secret = app.state.webhook_secret
        if secret is None or body.get("token") != secret:
            return JSONResponse({"error": "invalid verification token"}, status_code=403)
        if body.get("event", "message") != "message":
            return {"status": "skipped", "reason": "unhandled event type"}
        sender_id = body.get("sender_id")
        text = body.get("text")
        if not isinstance(sender_id, str) or not sender_id or not isinstance(text, str):
            return JSONResponse({"error": "sender_id and text are required"}, status_code=400)
        if len(text) > MAX_TEXT_SCALARS:
            return JSONResponse({"error": "text too long"}, status_code=413)
        if app.state.engine is None:
            return JSONResponse({"error": "engine not loaded"}, status_code=503)

        session_id = _derived_session_id(platform, sender_id)
        doc = await run_in_threadpool(_handle, session_id, text, platform)
        adapter = app.state.adapters.get(platform)
        if adapter is not None:
            adapter.deliver(sender_id, doc)
        return {"status": "ok", "delivered": adapter is not None}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
