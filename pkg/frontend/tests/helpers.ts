// Shared test doubles: a route-based fetch mock and a controllable
// EventSource substitute.

import { vi } from "vitest";

import type { EventSourceLike } from "../src/api.js";

export type RouteHandler = (init?: RequestInit) => { status: number; body: unknown };

export function mockFetch(routes: Record<string, RouteHandler>) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = vi.fn(async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const handler = routes[url.replace(/^https?:\/\/[^/]+/, "")];
    if (!handler) throw new Error(`unmocked route ${url}`);
    const { status, body } = handler(init);
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    } as Response;
  });
  vi.stubGlobal("fetch", fn);
  return { fn, calls };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export class FakeEventSource implements EventSourceLike {
  static instances: FakeEventSource[] = [];
  static reset(): void {
    FakeEventSource.instances = [];
  }

  listeners = new Map<string, ((event: MessageEvent) => void)[]>();
  onerror: ((event: unknown) => void) | null = null;
  onopen: ((event: unknown) => void) | null = null;
  closed = false;

  constructor(public url: string) {
    FakeEventSource.instances.push(this);
  }

  addEventListener(type: string, listener: (event: MessageEvent) => void): void {
    const existing = this.listeners.get(type) ?? [];
    existing.push(listener);
    this.listeners.set(type, existing);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.({});
  }

  emit(type: string, data: unknown): void {
    for (const listener of this.listeners.get(type) ?? []) {
      listener({ data: JSON.stringify(data) } as MessageEvent);
    }
  }

  fail(): void {
    this.onerror?.({});
  }
}

export function frame(overrides: Partial<Record<string, number>> = {}) {
  return {
    wall_time: 1000,
    sim_time: 0,
    business_rows_per_s: 5,
    sensor_rows_per_s: 50,
    business_rows_total: 100,
    sensor_rows_total: 1000,
    ...overrides,
  };
}
