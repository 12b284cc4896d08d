"""NLU-layer orchestration: classify, gate on the threshold, answer in the
question's language group, call bound external services, fall back otherwise.

Single-turn by design; sessions exist only so analytics can count turns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import requests

from .classifier import predict
from .corpus import IntentCatalog
from .datastore import ConversationStore, rfc3339, utc_now
from .embednet import EmbeddingModel

logger = logging.getLogger(__name__)

DEFAULT_EXTERNAL_TIMEOUT = 3.0


class EngineConfigError(ValueError):
    """Engine assembly found mismatched model/catalog/connector configuration."""


@dataclass
class Session:
    session_id: str
    channel: str = "web"
    started_at: str = ""
    last_active: str = ""
    turn_count: int = 0

    def __post_init__(self):
        now = rfc3339(utc_now())
        self.started_at = self.started_at or now
        self.last_active = self.last_active or self.started_at


@dataclass(frozen=True)
class Reply:
    kind: str  # answer | external | fallback
    text: str
    intent_id: str | None
    confidence: float
    language_group: str


@dataclass(frozen=True)
class ExternalBinding:
    """One external answer service, bound to intents by catalog key."""

    key: str
    endpoint: str
    fallback_text: dict[str, str]
    timeout: float = DEFAULT_EXTERNAL_TIMEOUT

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("binding timeout must be positive")


class ConnectorRegistry:
    def __init__(self, bindings: list[ExternalBinding] | None = None):
        self._bindings: dict[str, ExternalBinding] = {}
        for b in bindings or []:
            self.register(b)

    def register(self, binding: ExternalBinding) -> None:
        if binding.key in self._bindings:
            raise ValueError(f"duplicate connector key {binding.key!r}")
        self._bindings[binding.key] = binding

    def get(self, key: str) -> ExternalBinding:
        return self._bindings[key]

    def __contains__(self, key: str) -> bool:
        return key in self._bindings


@dataclass
class Engine:
    """Immutable serving state shared by all sessions."""

    model: EmbeddingModel
    threshold: float
    catalog: IntentCatalog
    connectors: ConnectorRegistry = field(default_factory=ConnectorRegistry)
    store: ConversationStore | None = None


def build_engine(
    model: EmbeddingModel,
    threshold: float,
    catalog: IntentCatalog,
    connectors: ConnectorRegistry | None = None,
    store: ConversationStore | None = None,
) -> Engine:
    """Assemble and cross-validate the serving engine.

    Every model tag must exist in the catalog, every referenced external
    service must be registered, and each binding must carry fallback text for
    the language groups of the intents bound to it.
    """
    connectors = connectors or ConnectorRegistry()
    problems = []
    catalog_ids = set(catalog.intent_ids())
    for tag in model.vocab.tag_to_index:
        if tag not in catalog_ids:
            problems.append(f"model tag {tag!r} not present in catalog")
    for e in catalog.entries:
        if e.external_service is None:
            continue
        if e.external_service not in connectors:
            problems.append(
                f"intent {e.intent_id!r}: external service {e.external_service!r} not registered"
            )
        elif e.language_group not in connectors.get(e.external_service).fallback_text:
            problems.append(
                f"connector {e.external_service!r}: no fallback text for group {e.language_group!r}"
            )
    if problems:
        raise EngineConfigError("engine configuration invalid:\n" + "\n".join(f"  - {p}" for p in problems))
    return Engine(model=model, threshold=threshold, catalog=catalog, connectors=connectors, store=store)


def select_answer(catalog: IntentCatalog, intent_id: str) -> tuple[str, str]:
    """The catalog-encoded answer and language group for one intent."""
    entry = catalog.entry(intent_id)  # raises KeyError for unknown ids
    return entry.answer, entry.language_group


def fallback_reply(catalog: IntentCatalog, language_group: str) -> str:
    """The configured default message for a language group."""
    return catalog.fallback_messages[language_group]


def invoke_external(binding: ExternalBinding, intent_id: str, language_group: str) -> str:
    """GET the bound endpoint; any failure degrades to the binding's fallback
    text for the language group, never to an exception."""
    try:
        resp = requests.get(
            binding.endpoint,
            params={"intent": intent_id, "lang": language_group},
            timeout=binding.timeout,
        )
        if resp.status_code != 200:
            raise RuntimeError(f"status {resp.status_code}")
        body = resp.json()
        text = body["text"]
        if not isinstance(text, str):
            raise RuntimeError("field 'text' is not a string")
        return text
    except Exception as exc:
        logger.warning("external service %r failed (%s); using fallback text", binding.key, exc)
        return _binding_fallback(binding, language_group)


def _binding_fallback(binding: ExternalBinding, language_group: str) -> str:
    if language_group in binding.fallback_text:
        return binding.fallback_text[language_group]
    return next(iter(binding.fallback_text.values()), "")


def _default_group(catalog: IntentCatalog) -> str:
    if "english" in catalog.groups:
        return "english"
    return next(iter(catalog.groups))


def handle_message(session: Session, text: str, engine: Engine) -> Reply:
    """Classify one message and answer, call the bound service, or fall back.

    Never raises: internal failures are logged and degrade to the fallback
    reply. Every fallback is also appended to the unanswered-questions log.
    """
    if engine is None or engine.model is None:
        raise RuntimeError("engine not loaded")
    session.turn_count += 1
    session.last_active = rfc3339(utc_now())
    try:
        return _respond(session, text, engine)
    except Exception:
        logger.exception("message handling failed; degrading to fallback")
        group = _default_group(engine.catalog)
        _log_unanswered(engine, text, session.channel)
        return Reply(
            kind="fallback",
            text=fallback_reply(engine.catalog, group),
            intent_id=None,
            confidence=0.0,
            language_group=group,
        )


def _respond(session: Session, text: str, engine: Engine) -> Reply:
    prediction = predict(engine.model, text)
    top_intent, confidence = prediction.top

    if confidence >= engine.threshold:
        entry = engine.catalog.entry(top_intent)
        if entry.external_service is not None:
            fetched = invoke_external(
                engine.connectors.get(entry.external_service),
                entry.intent_id,
                entry.language_group,
            )
            return Reply(
                kind="external",
                text=fetched,
                intent_id=entry.intent_id,
                confidence=confidence,
                language_group=entry.language_group,
            )
        return Reply(
            kind="answer",
            text=entry.answer,
            intent_id=entry.intent_id,
            confidence=confidence,
            language_group=entry.language_group,
        )

    # below threshold: reply in the best-guess group and log the question
    if prediction.ranked:
        group = engine.catalog.entry(top_intent).language_group
    else:
        group = _default_group(engine.catalog)
    _log_unanswered(engine, text, session.channel)
    return Reply(
        kind="fallback",
        text=fallback_reply(engine.catalog, group),
        intent_id=None,
        confidence=confidence,
        language_group=group,
    )


def _log_unanswered(engine: Engine, text: str, channel: str) -> None:
    if engine.store is None:
        return
    try:
        engine.store.append_unanswered(text, channel=channel)
    except Exception:
        logger.exception("failed to append unanswered question")
