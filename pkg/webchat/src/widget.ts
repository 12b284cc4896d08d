/**
 * DOM layer: renders the transcript state and wires the input form to the
 * gateway client. All behavior lives in the pure modules; this file only
 * translates state to elements.
 */

import type { GatewayClient } from './client.js';
import { checkDraft, MAX_TEXT_SCALARS } from './protocol.js';
import {
  draftEdited,
  initialState,
  replyArrived,
  requestFailed,
  sendStarted,
  type Bubble,
  type TranscriptState,
} from './transcript.js';

const KIND_LABELS: Record<string, string> = {
  fallback: 'no specific answer',
  external: 'live answer',
};

function renderBubble(bubble: Bubble): HTMLElement {
  const el = document.createElement('div');
  el.textContent = bubble.text;
  if (bubble.role === 'error') {
    el.className = 'bubble error';
    return el;
  }
  el.className = `bubble ${bubble.role}`;
  el.dir = bubble.direction;
  if (bubble.role === 'bot' && bubble.kind !== 'answer') {
    el.classList.add(bubble.kind);
    const tag = document.createElement('span');
    tag.className = 'kind-tag';
    tag.textContent = KIND_LABELS[bubble.kind] ?? bubble.kind;
    el.prepend(tag);
  }
  return el;
}

export interface WidgetHandle {
  /** Submit the current draft programmatically (same path as the button). */
  send(): Promise<void>;
  state(): TranscriptState;
}

export function mountWidget(
  root: HTMLElement,
  client: GatewayClient,
  sessionId: string,
): WidgetHandle {
  root.innerHTML = '';
  root.classList.add('crisisbot-widget');

  const status = document.createElement('div');
  status.className = 'status';
  status.textContent = 'connecting…';

  const transcript = document.createElement('div');
  transcript.className = 'transcript';

  const form = document.createElement('form');
  form.className = 'composer';
  const input = document.createElement('input');
  input.type = 'text';
  input.dir = 'auto';
  input.placeholder = 'Type your question…';
  input.maxLength = MAX_TEXT_SCALARS;
  const button = document.createElement('button');
  button.type = 'submit';
  button.textContent = 'Send';
  form.append(input, button);
  root.append(status, transcript, form);

  let state: TranscriptState = initialState;

  function render(): void {
    transcript.replaceChildren(...state.bubbles.map(renderBubble));
    transcript.scrollTop = transcript.scrollHeight;
    input.disabled = state.pending;
    button.disabled = state.pending;
    if (input.value !== state.draft) input.value = state.draft;
    if (!state.pending) input.focus();
  }

  async function send(): Promise<void> {
    const checked = checkDraft(input.value);
    if (!checked.ok) {
      if (checked.reason === 'too_long') {
        state = requestFailed(
          state,
          `Messages are limited to ${MAX_TEXT_SCALARS} characters.`,
          input.value,
        );
        render();
      }
      return;
    }
    state = sendStarted(draftEdited(state, input.value), checked.text);
    render();
    try {
      const reply = await client.sendMessage(sessionId, checked.text);
      state = replyArrived(state, reply);
    } catch (err) {
      state = requestFailed(
        state,
        'Could not reach the assistant. Your message is kept below — try again.',
        checked.text,
      );
    }
    render();
  }

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void send();
  });
  input.addEventListener('input', () => {
    state = draftEdited(state, input.value);
  });

  void client.health().then((health) => {
    status.textContent =
      health === null ? 'offline' : health.status === 'ready' ? 'ready' : 'loading…';
    status.classList.toggle('offline', health === null);
  });

  render();
  return { send, state: () => state };
}
