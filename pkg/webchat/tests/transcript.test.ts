import { describe, expect, it } from 'vitest';

import type { WireReply } from '../src/protocol.js';
import {
  draftEdited,
  initialState,
  replyArrived,
  requestFailed,
  sendStarted,
} from '../src/transcript.js';

function reply(text: string, kind: WireReply['kind'] = 'answer'): WireReply {
  return {
    session_id: 's',
    kind,
    text,
    intent_id: kind === 'answer' ? 'some.intent' : null,
    confidence: 0.3,
    language_group: 'fr_tunizi',
    timestamp: '',
  };
}

describe('transcript state machine', () => {
  it('appends bubbles in request order', () => {
    let state = sendStarted(initialState, '3asslama');
    state = replyArrived(state, reply('Mar7be bik'));
    state = sendStarted(state, 'how r u');
    state = replyArrived(state, reply('fine thank you, how can I help you?'));
    expect(state.bubbles.map((b) => b.role)).toEqual(['user', 'bot', 'user', 'bot']);
    expect(state.bubbles[1]).toMatchObject({ text: 'Mar7be bik', direction: 'ltr' });
  });

  it('marks a single request in flight and clears the draft', () => {
    const state = sendStarted(draftEdited(initialState, '3asslama'), '3asslama');
    expect(state.pending).toBe(true);
    expect(state.draft).toBe('');
    expect(() => sendStarted(state, 'again')).toThrow(/one request/);
  });

  it('renders Arabic replies right-to-left', () => {
    const state = replyArrived(sendStarted(initialState, 'صباح الخير'), reply('صباح النور'));
    expect(state.bubbles[0]).toMatchObject({ role: 'user', direction: 'rtl' });
    expect(state.bubbles[1]).toMatchObject({ role: 'bot', direction: 'rtl' });
  });

  it('tags fallback replies so they render distinctly', () => {
    const state = replyArrived(
      sendStarted(initialState, 'qqqqq zz'),
      reply('Sorry, I do not have a specific answer for that.', 'fallback'),
    );
    expect(state.bubbles[1]).toMatchObject({ role: 'bot', kind: 'fallback' });
  });

  it('keeps the draft when the request fails', () => {
    let state = sendStarted(initialState, 'bonjour le bot');
    state = requestFailed(state, 'Could not reach the assistant.', 'bonjour le bot');
    expect(state.pending).toBe(false);
    expect(state.draft).toBe('bonjour le bot');
    expect(state.bubbles.at(-1)).toMatchObject({ role: 'error' });
  });

  it('never mutates prior states', () => {
    const before = sendStarted(initialState, 'hi');
    const after = replyArrived(before, reply('hello'));
    expect(before.bubbles).toHaveLength(1);
    expect(after.bubbles).toHaveLength(2);
    expect(initialState.bubbles).toHaveLength(0);
  });
});
