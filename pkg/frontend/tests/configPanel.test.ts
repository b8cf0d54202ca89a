import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, type SensorEntry } from "../src/api.js";
import { attachServerErrors, createConfigPanel, validateEntries } from "../src/configPanel.js";
import { mockFetch } from "./helpers.js";

afterEach(() => vi.unstubAllGlobals());

function entry(overrides: Partial<SensorEntry> = {}): SensorEntry {
  return {
    sensor_id: 1,
    workplace_id: 1,
    kind: "temperature",
    rate_hz: 10,
    base: 40,
    amplitude: 10,
    period_s: 60,
    noise_sigma: 2,
    phase_ms: 0,
    ...overrides,
  };
}

describe("validateEntries", () => {
  it("accepts a sane entry", () => {
    expect(validateEntries([entry()]).size).toBe(0);
  });

  it("rejects rate 0 before any request", () => {
    const errors = validateEntries([entry({ rate_hz: 0 })]);
    expect(errors.get(0)).toContain("rate out of range");
  });

  it("rejects duplicate sensor ids", () => {
    const errors = validateEntries([entry(), entry({ workplace_id: 2 })]);
    expect(errors.get(1)).toContain("duplicate sensor_id 1");
  });

  it("rejects a negative amplitude and fractional phase", () => {
    expect(validateEntries([entry({ amplitude: -1 })]).get(0)).toContain("amplitude");
    expect(validateEntries([entry({ phase_ms: 1.5 })]).get(0)).toContain("phase_ms");
  });
});

describe("attachServerErrors", () => {
  it("maps sensors[i] prefixes onto row indexes", () => {
    const { rows, general } = attachServerErrors([
      "sensors[1]: unknown workplace 99",
      "unknown fields: color",
    ]);
    expect(rows.get(1)).toBe("unknown workplace 99");
    expect(general).toEqual(["unknown fields: color"]);
  });
});

describe("config panel", () => {
  const doc = { sensors: [entry()], revision: 1 };

  it("loads the current document and shows its revision", async () => {
    mockFetch({ "/api/sensors/config": () => ({ status: 200, body: doc }) });
    const panel = createConfigPanel(new ApiClient());
    await panel.load();
    expect(panel.el.querySelectorAll(".sensor-row")).toHaveLength(1);
    expect(panel.el.querySelector(".revision-badge")?.textContent).toBe("rev 1");
  });

  it("blocks submission on client-side errors without any request", async () => {
    const { calls } = mockFetch({
      "/api/sensors/config": () => ({ status: 200, body: doc }),
    });
    const panel = createConfigPanel(new ApiClient());
    await panel.load();
    calls.length = 0;
    panel.setDraft([entry({ rate_hz: 0 })]);
    await panel.submit();
    expect(calls).toHaveLength(0);
    expect(panel.el.querySelector(".row-error")?.textContent).toContain("rate out of range");
  });

  it("attaches server 400 violations to the offending row", async () => {
    mockFetch({
      "/api/sensors/config": (init) =>
        init?.method === "PUT"
          ? { status: 400, body: { errors: ["sensors[0]: unknown workplace 99"] } }
          : { status: 200, body: doc },
    });
    const panel = createConfigPanel(new ApiClient());
    await panel.load();
    panel.setDraft([entry({ workplace_id: 99 })]);
    await panel.submit();
    const row = panel.el.querySelector(".sensor-row[data-index='0']")!;
    expect(row.querySelector(".row-error")?.textContent).toBe("unknown workplace 99");
  });

  it("updates the revision badge after an accepted PUT", async () => {
    mockFetch({
      "/api/sensors/config": (init) =>
        init?.method === "PUT"
          ? { status: 200, body: { applied: true, revision: 2 } }
          : { status: 200, body: doc },
    });
    const panel = createConfigPanel(new ApiClient());
    await panel.load();
    panel.setDraft([entry({ rate_hz: 20 })]);
    await panel.submit();
    expect(panel.revision()).toBe(2);
    expect(panel.el.querySelector(".revision-badge")?.textContent).toBe("rev 2");
  });

  it("draft edits never mutate the loaded document", async () => {
    mockFetch({ "/api/sensors/config": () => ({ status: 200, body: doc }) });
    const panel = createConfigPanel(new ApiClient());
    await panel.load();
    panel.draft()[0].rate_hz = 999;
    expect(doc.sensors[0].rate_hz).toBe(10);
  });
});
