// Sensor configuration form: edits a draft copy of the document; nothing
// touches the server until submit. Client checks mirror the server's rules;
// server 400 violations attach to the offending row via their sensors[i]
// prefix.

import type { ApiClient, SensorEntry } from "./api.js";

const KINDS = ["temperature", "noise", "vibration"];
const MAX_RATE = 10_000;

const FIELDS: { key: keyof SensorEntry; label: string; step?: string }[] = [
  { key: "sensor_id", label: "id", step: "1" },
  { key: "workplace_id", label: "workplace", step: "1" },
  { key: "kind", label: "kind" },
  { key: "rate_hz", label: "rate Hz" },
  { key: "base", label: "base" },
  { key: "amplitude", label: "amplitude" },
  { key: "period_s", label: "period s" },
  { key: "noise_sigma", label: "sigma" },
  { key: "phase_ms", label: "phase ms", step: "1" },
];

export function validateEntries(entries: SensorEntry[]): Map<number, string> {
  const errors = new Map<number, string>();
  const seen = new Set<number>();
  entries.forEach((entry, i) => {
    const bad = (msg: string) => {
      if (!errors.has(i)) errors.set(i, msg);
    };
    if (!Number.isInteger(entry.sensor_id) || entry.sensor_id < 1) {
      bad("sensor_id must be a positive integer");
    } else if (seen.has(entry.sensor_id)) {
      bad(`duplicate sensor_id ${entry.sensor_id}`);
    } else {
      seen.add(entry.sensor_id);
    }
    if (!Number.isInteger(entry.workplace_id) || entry.workplace_id < 1) {
      bad("workplace_id must be a positive integer");
    }
    if (!KINDS.includes(entry.kind)) bad(`kind must be one of ${KINDS.join("/")}`);
    if (!(entry.rate_hz > 0) || entry.rate_hz > MAX_RATE) {
      bad(`rate out of range (0, ${MAX_RATE}]`);
    }
    if (!Number.isFinite(entry.base)) bad("base must be a number");
    if (!(entry.amplitude >= 0)) bad("amplitude must be non-negative");
    if (!(entry.period_s > 0)) bad("period_s must be positive");
    if (!(entry.noise_sigma >= 0)) bad("noise_sigma must be non-negative");
    if (!Number.isInteger(entry.phase_ms) || entry.phase_ms < 0) {
      bad("phase_ms must be a non-negative integer");
    }
  });
  return errors;
}

/** Map server violations ("sensors[3]: …") onto row indexes. */
export function attachServerErrors(errors: string[]): { rows: Map<number, string>; general: string[] } {
  const rows = new Map<number, string>();
  const general: string[] = [];
  for (const error of errors) {
    const match = /^sensors\[(\d+)\]:\s*(.*)$/.exec(error);
    if (match) {
      const index = Number(match[1]);
      rows.set(index, rows.has(index) ? `${rows.get(index)}; ${match[2]}` : match[2]);
    } else {
      general.push(error);
    }
  }
  return { rows, general };
}

export interface ConfigPanel {
  el: HTMLElement;
  load(): Promise<void>;
  submit(): Promise<void>;
  draft(): SensorEntry[];
  setDraft(entries: SensorEntry[]): void;
  revision(): number;
}

export function createConfigPanel(api: ApiClient): ConfigPanel {
  let entries: SensorEntry[] = [];
  let revision = 0;

  const el = document.createElement("div");
  el.className = "config-panel";
  el.hidden = true;
  const badge = document.createElement("span");
  badge.className = "revision-badge";
  const heading = document.createElement("h2");
  heading.textContent = "Sensors ";
  heading.append(badge);
  const general = document.createElement("div");
  general.className = "config-errors";
  const rowsEl = document.createElement("div");
  rowsEl.className = "sensor-rows";
  const addButton = document.createElement("button");
  addButton.textContent = "Add sensor";
  addButton.className = "add-sensor";
  const submitButton = document.createElement("button");
  submitButton.textContent = "Apply";
  submitButton.className = "submit-config";
  el.append(heading, general, rowsEl, addButton, submitButton);

  function render(errorRows: Map<number, string> = new Map()): void {
    badge.textContent = `rev ${revision}`;
    rowsEl.replaceChildren();
    entries.forEach((entry, i) => {
      const row = document.createElement("div");
      row.className = "sensor-row";
      row.dataset.index = String(i);
      FIELDS.forEach(({ key, label, step }) => {
        const wrap = document.createElement("label");
        wrap.textContent = label;
        let input: HTMLInputElement | HTMLSelectElement;
        if (key === "kind") {
          input = document.createElement("select");
          for (const kind of KINDS) {
            const option = document.createElement("option");
            option.value = kind;
            option.textContent = kind;
            input.append(option);
          }
          input.value = entry.kind;
        } else {
          input = document.createElement("input");
          input.type = "number";
          if (step) input.step = step;
          input.value = String(entry[key]);
        }
        input.dataset.field = key;
        input.addEventListener("change", () => {
          const raw = input.value;
          (entry as unknown as Record<string, unknown>)[key] =
            key === "kind" ? raw : raw === "" ? Number.NaN : Number(raw);
        });
        wrap.append(input);
        row.append(wrap);
      });
      const remove = document.createElement("button");
      remove.textContent = "x";
      remove.className = "remove-sensor";
      remove.addEventListener("click", () => {
        entries.splice(i, 1);
        render();
      });
      row.append(remove);
      const message = errorRows.get(i);
      if (message) {
        const inline = document.createElement("div");
        inline.className = "row-error";
        inline.textContent = message;
        row.append(inline);
      }
      rowsEl.append(row);
    });
  }

  addButton.addEventListener("click", () => {
    const nextId = 1 + Math.max(0, ...entries.map((e) => e.sensor_id));
    entries.push({
      sensor_id: nextId,
      workplace_id: 1,
      kind: "temperature",
      rate_hz: 10,
      base: 40,
      amplitude: 10,
      period_s: 60,
      noise_sigma: 2,
      phase_ms: 0,
    });
    render();
  });

  async function submit(): Promise<void> {
    general.replaceChildren();
    const clientErrors = validateEntries(entries);
    if (clientErrors.size > 0) {
      render(clientErrors); // no request leaves the browser
      return;
    }
    const outcome = await api.putConfig({ sensors: entries });
    if (outcome.ok) {
      revision = outcome.revision;
      render();
      return;
    }
    const { rows, general: rest } = attachServerErrors(outcome.errors);
    render(rows);
    for (const message of rest) {
      const div = document.createElement("div");
      div.className = "general-error";
      div.textContent = message;
      general.append(div);
    }
  }

  submitButton.addEventListener("click", () => void submit());

  return {
    el,
    async load(): Promise<void> {
      const doc = await api.getConfig();
      entries = doc.sensors.map((s) => ({ ...s }));
      revision = doc.revision ?? 0;
      render();
    },
    submit,
    draft: () => entries,
    setDraft(next: SensorEntry[]): void {
      entries = next.map((s) => ({ ...s }));
      render();
    },
    revision: () => revision,
  };
}
