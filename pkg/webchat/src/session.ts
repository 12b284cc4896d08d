/**
 * Per-tab session identity: random on first use, kept in sessionStorage so it
 * survives navigation within the tab but not across tabs.
 */

const STORAGE_KEY = 'crisisbot-session';
const ALPHABET = 'abcdefghijklmnopqrstuvwxyz0123456789';

export function newSessionId(length = 24): string {
  const out: string[] = [];
  const cryptoObj = globalThis.crypto;
  if (cryptoObj?.getRandomValues) {
    const bytes = new Uint8Array(length);
    cryptoObj.getRandomValues(bytes);
    for (const b of bytes) out.push(ALPHABET[b % ALPHABET.length]!);
  } else {
    for (let i = 0; i < length; i += 1) {
      out.push(ALPHABET[Math.floor(Math.random() * ALPHABET.length)]!);
    }
  }
  return out.join('');
}

interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function tabSessionId(storage: StorageLike): string {
  const existing = storage.getItem(STORAGE_KEY);
  if (existing && /^[A-Za-z0-9-]{1,64}$/.test(existing)) return existing;
  const fresh = newSessionId();
  storage.setItem(STORAGE_KEY, fresh);
  return fresh;
}
