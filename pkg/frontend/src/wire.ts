// Thin client for the wire protocol: one JSON message per POST.

import type { WireRequest, WireResponse } from "./types";

export class WireClient {
  constructor(
    private readonly endpoint: string,
    private readonly fetchImpl: typeof fetch = (...args) => fetch(...args),
  ) {}

  async send<T extends WireResponse = WireResponse>(req: WireRequest): Promise<T> {
    const res = await this.fetchImpl(`${this.endpoint}/api/wire`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    return (await res.json()) as T;
  }

  /** Like send(), but turns protocol-level errors into exceptions. */
  async expectOk<T extends WireResponse = WireResponse>(req: WireRequest): Promise<T> {
    const out = await this.send<T>(req);
    if (out.status !== "ok") {
      const err = out.error;
      throw new WireFailure(err?.message ?? "request failed", err?.code ?? "error", err?.near_misses ?? []);
    }
    return out;
  }
}

export class WireFailure extends Error {
  constructor(
    message: string,
    readonly code: string,
    readonly nearMisses: string[],
  ) {
    super(message);
  }
}
