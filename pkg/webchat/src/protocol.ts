/**
 * Wire protocol of the gateway: POST /v1/messages and GET /v1/health.
 * The widget depends on nothing but these shapes.
 */

export type ReplyKind = 'answer' | 'external' | 'fallback';

export interface WireMessage {
  session_id: string;
  text: string;
  channel: string;
}

export interface WireReply {
  session_id: string;
  kind: ReplyKind;
  text: string;
  intent_id: string | null;
  confidence: number;
  language_group: string;
  timestamp: string;
}

export interface HealthStatus {
  status: 'ready' | 'loading';
  threshold: number | null;
}

/** The gateway rejects texts longer than this many Unicode scalar values. */
export const MAX_TEXT_SCALARS = 2000;

/** Length in Unicode scalar values (what the server counts), not UTF-16 units. */
export function countScalars(text: string): number {
  let n = 0;
  for (const _ of text) n += 1;
  return n;
}

export type DraftCheck =
  | { ok: true; text: string }
  | { ok: false; reason: 'empty' | 'too_long' };

/** Client-side gate applied before a draft may be sent. */
export function checkDraft(raw: string): DraftCheck {
  const text = raw.trim();
  if (!text) return { ok: false, reason: 'empty' };
  if (countScalars(text) > MAX_TEXT_SCALARS) return { ok: false, reason: 'too_long' };
  return { ok: true, text };
}

export function buildMessagePayload(sessionId: string, text: string): WireMessage {
  return { session_id: sessionId, text, channel: 'web' };
}

const REPLY_KINDS: ReadonlySet<string> = new Set(['answer', 'external', 'fallback']);

/** Validate a decoded response body; throws on anything malformed. */
export function parseReply(data: unknown): WireReply {
  if (typeof data !== 'object' || data === null) {
    throw new Error('reply is not an object');
  }
  const doc = data as Record<string, unknown>;
  if (typeof doc.kind !== 'string' || !REPLY_KINDS.has(doc.kind)) {
    throw new Error(`unknown reply kind: ${String(doc.kind)}`);
  }
  if (typeof doc.text !== 'string') throw new Error('reply text missing');
  if (typeof doc.session_id !== 'string') throw new Error('reply session_id missing');
  if (typeof doc.confidence !== 'number') throw new Error('reply confidence missing');
  if (typeof doc.language_group !== 'string') throw new Error('reply language_group missing');
  return {
    session_id: doc.session_id,
    kind: doc.kind as ReplyKind,
    text: doc.text,
    intent_id: typeof doc.intent_id === 'string' ? doc.intent_id : null,
    confidence: doc.confidence,
    language_group: doc.language_group,
    timestamp: typeof doc.timestamp === 'string' ? doc.timestamp : '',
  };
}
