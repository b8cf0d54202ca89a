// Typed client for the plantpulse HTTP API. All server interactions of the UI
// go through this module; components never compute data semantics themselves.

export interface MetricsFrame {
  wall_time: number;
  sim_time: number;
  business_rows_per_s: number;
  sensor_rows_per_s: number;
  business_rows_total: number;
  sensor_rows_total: number;
}

export interface SensorEntry {
  sensor_id: number;
  workplace_id: number;
  kind: string;
  rate_hz: number;
  base: number;
  amplitude: number;
  period_s: number;
  noise_sigma: number;
  phase_ms: number;
}

export interface ConfigDoc {
  sensors: SensorEntry[];
  revision?: number;
}

export interface QueryColumn {
  name: string;
  type: string; // int64 | decimal64 | text | timestamp
}

export interface QueryResult {
  columns: QueryColumn[];
  rows: (number | string | null)[][];
  elapsed_ms: number;
}

export interface PredefinedEntry {
  name: string;
  description: string;
  sql: string;
}

export type QueryOutcome =
  | { ok: true; result: QueryResult }
  | { ok: false; error: string; offset: number | null };

export type ConfigOutcome =
  | { ok: true; revision: number }
  | { ok: false; errors: string[] };

export class ApiClient {
  constructor(private base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async simStatus(): Promise<{ running: boolean }> {
    const res = await fetch(this.url("/api/sim/status"));
    return res.json();
  }

  async setRunning(run: boolean): Promise<boolean> {
    const res = await fetch(this.url(`/api/sim/${run ? "start" : "stop"}`), {
      method: "POST",
    });
    if (!res.ok) throw new Error(`sim control failed: ${res.status}`);
    const body = await res.json();
    return body.running;
  }

  async metrics(): Promise<MetricsFrame> {
    const res = await fetch(this.url("/api/metrics"));
    return res.json();
  }

  async getConfig(): Promise<ConfigDoc> {
    const res = await fetch(this.url("/api/sensors/config"));
    return res.json();
  }

  async putConfig(doc: ConfigDoc): Promise<ConfigOutcome> {
    const res = await fetch(this.url("/api/sensors/config"), {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ sensors: doc.sensors }),
    });
    const body = await res.json();
    if (res.ok) return { ok: true, revision: body.revision };
    return { ok: false, errors: body.errors ?? [String(body.error ?? res.status)] };
  }

  async query(sql: string, signal?: AbortSignal): Promise<QueryOutcome> {
    const res = await fetch(this.url("/api/query"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ sql }),
      signal,
    });
    const body = await res.json();
    if (res.ok) return { ok: true, result: body };
    return { ok: false, error: body.error ?? `HTTP ${res.status}`, offset: body.offset ?? null };
  }

  async predefined(): Promise<PredefinedEntry[]> {
    const res = await fetch(this.url("/api/query/predefined"));
    return res.json();
  }
}

// minimal EventSource surface so tests can substitute a fake
export interface EventSourceLike {
  addEventListener(type: string, listener: (event: MessageEvent) => void): void;
  close(): void;
  onerror: ((event: unknown) => void) | null;
  onopen: ((event: unknown) => void) | null;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export type StreamStatus = "connected" | "reconnecting" | "down";

const BACKOFF_MS = [1000, 2000, 4000];
const FAILURES_BEFORE_DOWN = 3;

/** Subscribes to /api/metrics/stream with reconnect-and-backoff.
 *
 * Reports "reconnecting" while retrying and "down" once three consecutive
 * attempts have failed (retries continue regardless; a later success flips
 * the status back to "connected"). */
export class MetricsStream {
  private source: EventSourceLike | null = null;
  private failures = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private onFrame: (frame: MetricsFrame) => void,
    private onStatus: (status: StreamStatus) => void,
    private factory: EventSourceFactory = (url) =>
      new EventSource(url) as unknown as EventSourceLike,
    private base: string = "",
  ) {}

  connect(): void {
    if (this.closed) return;
    const source = this.factory(this.base + "/api/metrics/stream");
    this.source = source;
    source.onopen = () => {
      this.failures = 0;
      this.onStatus("connected");
    };
    source.addEventListener("metrics", (event) => {
      this.failures = 0;
      this.onFrame(JSON.parse(event.data) as MetricsFrame);
    });
    source.onerror = () => {
      source.close();
      if (this.closed) return;
      this.failures += 1;
      this.onStatus(this.failures >= FAILURES_BEFORE_DOWN ? "down" : "reconnecting");
      const delay = BACKOFF_MS[Math.min(this.failures, BACKOFF_MS.length) - 1];
      this.timer = setTimeout(() => this.connect(), delay);
    };
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.source?.close();
  }
}
