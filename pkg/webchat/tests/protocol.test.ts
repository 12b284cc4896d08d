import { describe, expect, it } from 'vitest';

import {
  buildMessagePayload,
  checkDraft,
  countScalars,
  MAX_TEXT_SCALARS,
  parseReply,
} from '../src/protocol.js';

describe('countScalars', () => {
  it('counts code points, not UTF-16 units', () => {
    expect(countScalars('abc')).toBe(3);
    expect(countScalars('صباح الخير')).toBe(10);
    expect(countScalars('𝟘𝟙')).toBe(2); // astral plane
    expect('𝟘𝟙'.length).toBe(4);
  });
});

describe('checkDraft', () => {
  it('trims and accepts ordinary drafts', () => {
    expect(checkDraft('  3asslama  ')).toEqual({ ok: true, text: '3asslama' });
  });

  it('rejects empty and whitespace-only drafts', () => {
    expect(checkDraft('')).toEqual({ ok: false, reason: 'empty' });
    expect(checkDraft('   \n ')).toEqual({ ok: false, reason: 'empty' });
  });

  it('blocks drafts beyond the server limit', () => {
    expect(checkDraft('x'.repeat(MAX_TEXT_SCALARS))).toMatchObject({ ok: true });
    expect(checkDraft('x'.repeat(MAX_TEXT_SCALARS + 1))).toEqual({
      ok: false,
      reason: 'too_long',
    });
  });
});

describe('buildMessagePayload', () => {
  it('matches the wire field names', () => {
    expect(buildMessagePayload('tab-1', 'hi')).toEqual({
      session_id: 'tab-1',
      text: 'hi',
      channel: 'web',
    });
  });
});

describe('parseReply', () => {
  const valid = {
    session_id: 's1',
    kind: 'answer',
    text: 'Mar7be bik',
    intent_id: 'greeting.tunizi',
    confidence: 0.24,
    language_group: 'fr_tunizi',
    timestamp: '2020-03-23T10:00:00+00:00',
  };

  it('accepts a well-formed reply', () => {
    expect(parseReply(valid)).toEqual(valid);
  });

  it('accepts a null intent on fallbacks', () => {
    const reply = parseReply({ ...valid, kind: 'fallback', intent_id: null });
    expect(reply.intent_id).toBeNull();
    expect(reply.kind).toBe('fallback');
  });

  it.each([
    ['not an object', 'nope'],
    ['unknown kind', { ...valid, kind: 'shrug' }],
    ['missing text', { ...valid, text: undefined }],
    ['missing confidence', { ...valid, confidence: 'high' }],
  ])('rejects %s', (_label, doc) => {
    expect(() => parseReply(doc)).toThrow();
  });
});
