/**
 * Pure transcript state machine. The DOM layer renders whatever this says;
 * every transition returns a fresh state object.
 *
 * Invariants: one in-flight request at a time (input disabled while pending);
 * a failed request appends an error bubble and puts the draft back.
 */

import type { ReplyKind, WireReply } from './protocol.js';
import { textDirection, type Direction } from './rtl.js';

export type Bubble =
  | { role: 'user'; text: string; direction: Direction }
  | { role: 'bot'; text: string; kind: ReplyKind; direction: Direction }
  | { role: 'error'; text: string };

export interface TranscriptState {
  bubbles: readonly Bubble[];
  pending: boolean;
  draft: string;
}

export const initialState: TranscriptState = { bubbles: [], pending: false, draft: '' };

export function draftEdited(state: TranscriptState, draft: string): TranscriptState {
  return { ...state, draft };
}

/** User bubble appended, request marked in flight, draft cleared. */
export function sendStarted(state: TranscriptState, text: string): TranscriptState {
  if (state.pending) throw new Error('one request at a time');
  return {
    bubbles: [...state.bubbles, { role: 'user', text, direction: textDirection(text) }],
    pending: true,
    draft: '',
  };
}

/** Bot bubble appended with its render direction; input re-enabled. */
export function replyArrived(state: TranscriptState, reply: WireReply): TranscriptState {
  return {
    ...state,
    bubbles: [
      ...state.bubbles,
      { role: 'bot', text: reply.text, kind: reply.kind, direction: textDirection(reply.text) },
    ],
    pending: false,
  };
}

/** Error bubble appended; the unsent text returns to the draft for retry. */
export function requestFailed(
  state: TranscriptState,
  message: string,
  unsentText: string,
): TranscriptState {
  return {
    bubbles: [...state.bubbles, { role: 'error', text: message }],
    pending: false,
    draft: unsentText,
  };
}
