// Chart rendering: SVG only, no chart library. All values shown come from the
// server; this module only scales and draws them.

import type { QueryColumn, QueryResult } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

/** Bounded ring of the latest chart points. */
export class Ring {
  private items: number[] = [];

  constructor(readonly capacity: number = 120) {}

  push(value: number): void {
    this.items.push(value);
    if (this.items.length > this.capacity) this.items.shift();
  }

  values(): number[] {
    return [...this.items];
  }

  get length(): number {
    return this.items.length;
  }
}

function svg(tag: string, attrs: Record<string, string | number>): SVGElement {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, String(value));
  return el;
}

export interface LineChart {
  el: HTMLElement;
  append(value: number): void;
  pointCount(): number;
}

/** Live-updating line chart over a 120-point ring; one point per frame. */
export function createLineChart(title: string, color: string): LineChart {
  const ring = new Ring(120);
  const el = document.createElement("div");
  el.className = "rate-chart";
  const label = document.createElement("div");
  label.className = "chart-title";
  label.textContent = title;
  const valueLabel = document.createElement("span");
  valueLabel.className = "chart-value";
  label.append(" ", valueLabel);
  const width = 360;
  const height = 90;
  const root = svg("svg", { width, height, viewBox: `0 0 ${width} ${height}` });
  el.append(label, root);

  function render(): void {
    root.replaceChildren();
    const values = ring.values();
    if (values.length === 0) return;
    const max = Math.max(1e-9, ...values);
    const step = values.length > 1 ? width / (ring.capacity - 1) : 0;
    const points = values
      .map((v, i) => `${(i * step).toFixed(1)},${(height - (v / max) * (height - 6) - 3).toFixed(1)}`)
      .join(" ");
    root.append(
      svg("polyline", { points, fill: "none", stroke: color, "stroke-width": 1.5 }),
    );
    valueLabel.textContent = `${values[values.length - 1].toFixed(1)} rows/s`;
  }

  return {
    el,
    append(value: number): void {
      ring.push(value);
      render();
    },
    pointCount(): number {
      return ring.length;
    },
  };
}

export interface ChartSpec {
  xIndex: number;
  seriesIndexes: number[];
}

const CATEGORY_TYPES = new Set(["text", "int64", "timestamp"]);
const NUMERIC_TYPES = new Set(["int64", "decimal64", "timestamp"]);

/** First text/id column becomes the x axis, remaining numeric columns the
 * series; null when the result has no such shape. */
export function chartSpec(columns: QueryColumn[]): ChartSpec | null {
  const xIndex = columns.findIndex((c) => CATEGORY_TYPES.has(c.type));
  if (xIndex < 0) return null;
  const seriesIndexes = columns
    .map((c, i) => (i !== xIndex && NUMERIC_TYPES.has(c.type) ? i : -1))
    .filter((i) => i >= 0);
  if (seriesIndexes.length === 0) return null;
  return { xIndex, seriesIndexes };
}

const SERIES_COLORS = ["#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2"];

/** Grouped-bar chart of a query result, or a "no chartable shape" note. */
export function renderResultChart(container: HTMLElement, result: QueryResult): boolean {
  container.replaceChildren();
  const spec = chartSpec(result.columns);
  if (spec === null || result.rows.length === 0) {
    const note = document.createElement("div");
    note.className = "no-chart";
    note.textContent = "no chartable shape";
    container.append(note);
    return false;
  }
  const width = 560;
  const height = 180;
  const root = svg("svg", { width, height, viewBox: `0 0 ${width} ${height}` });
  root.setAttribute("class", "result-chart");
  const rows = result.rows.slice(0, 40);
  const values = rows
    .flatMap((row) => spec.seriesIndexes.map((i) => row[i]))
    .filter((v): v is number => typeof v === "number");
  const max = Math.max(1e-9, ...values.map((v) => Math.abs(v)));
  const groupWidth = width / rows.length;
  const barWidth = Math.max(2, (groupWidth * 0.8) / spec.seriesIndexes.length);

  rows.forEach((row, r) => {
    spec.seriesIndexes.forEach((column, s) => {
      const value = row[column];
      if (typeof value !== "number") return;
      const barHeight = (Math.abs(value) / max) * (height - 30);
      root.append(
        svg("rect", {
          x: r * groupWidth + groupWidth * 0.1 + s * barWidth,
          y: height - 18 - barHeight,
          width: barWidth,
          height: Math.max(1, barHeight),
          fill: SERIES_COLORS[s % SERIES_COLORS.length],
          class: "bar",
        }),
      );
    });
    const tick = svg("text", {
      x: r * groupWidth + groupWidth / 2,
      y: height - 4,
      "text-anchor": "middle",
      "font-size": 9,
      class: "tick",
    });
    tick.textContent = String(row[spec.xIndex] ?? "NULL").slice(0, 12);
    root.append(tick);
  });

  const legend = document.createElement("div");
  legend.className = "legend";
  spec.seriesIndexes.forEach((column, s) => {
    const item = document.createElement("span");
    item.className = "legend-item";
    item.style.color = SERIES_COLORS[s % SERIES_COLORS.length];
    item.textContent = result.columns[column].name;
    legend.append(item);
  });
  container.append(root, legend);
  return true;
}
