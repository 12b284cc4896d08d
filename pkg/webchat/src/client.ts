/**
 * Minimal HTTP client for the gateway wire protocol; fetch is injectable so
 * tests can stub the network.
 */

import {
  buildMessagePayload,
  parseReply,
  type HealthStatus,
  type WireReply,
} from './protocol.js';

export class GatewayError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = 'GatewayError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async sendMessage(sessionId: string, text: string): Promise<WireReply> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/v1/messages`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(buildMessagePayload(sessionId, text)),
      });
    } catch (err) {
      throw new GatewayError(`gateway unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      throw new GatewayError(`gateway answered ${response.status}`, response.status);
    }
    let body: unknown;
    try {
      body = await response.json();
    } catch {
      throw new GatewayError('gateway sent a malformed reply');
    }
    return parseReply(body);
  }

  async health(): Promise<HealthStatus | null> {
    try {
      const response = await this.fetchFn(`${this.baseUrl}/v1/health`);
      if (!response.ok) return null;
      const doc = (await response.json()) as HealthStatus;
      return doc.status === 'ready' || doc.status === 'loading' ? doc : null;
    } catch {
      return null;
    }
  }
}
