import { describe, expect, it } from "vitest";

import { Ring, chartSpec, createLineChart, renderResultChart } from "../src/charts.js";
import type { QueryResult } from "../src/api.js";

describe("Ring", () => {
  it("is bounded at its capacity", () => {
    const ring = new Ring(120);
    for (let i = 0; i < 200; i++) ring.push(i);
    expect(ring.length).toBe(120);
    expect(ring.values()[0]).toBe(80);
    expect(ring.values().at(-1)).toBe(199);
  });
});

describe("createLineChart", () => {
  it("appends exactly one point per frame", () => {
    const chart = createLineChart("sensor rows/s", "#000");
    for (let i = 0; i < 10; i++) chart.append(i * 1.5);
    expect(chart.pointCount()).toBe(10);
    expect(chart.el.querySelector("polyline")).not.toBeNull();
  });

  it("never exceeds the 120-point ring", () => {
    const chart = createLineChart("x", "#000");
    for (let i = 0; i < 500; i++) chart.append(i);
    expect(chart.pointCount()).toBe(120);
  });
});

describe("chartSpec", () => {
  it("charts an id column plus numeric series", () => {
    const spec = chartSpec([
      { name: "PRODUCTION_ORDER", type: "int64" },
      { name: "AVG_TEMP", type: "decimal64" },
      { name: "AVG_NOISE", type: "decimal64" },
    ]);
    expect(spec).toEqual({ xIndex: 0, seriesIndexes: [1, 2] });
  });

  it("charts a text category with one numeric column", () => {
    const spec = chartSpec([
      { name: "SUPPLIER", type: "text" },
      { name: "AVG_VIBRATION", type: "decimal64" },
    ]);
    expect(spec).toEqual({ xIndex: 0, seriesIndexes: [1] });
  });

  it("rejects a lone aggregate value", () => {
    expect(chartSpec([{ name: "COUNT(*)", type: "int64" }])).toBeNull();
    expect(chartSpec([{ name: "AVG_TEMP", type: "decimal64" }])).toBeNull();
  });
});

describe("renderResultChart", () => {
  const chartable: QueryResult = {
    columns: [
      { name: "SUPPLIER", type: "text" },
      { name: "AVG_VIBRATION", type: "decimal64" },
    ],
    rows: [
      ["A", 3.0],
      ["B", 6.0],
    ],
    elapsed_ms: 1.0,
  };

  it("renders one bar per value plus a legend", () => {
    const pane = document.createElement("div");
    expect(renderResultChart(pane, chartable)).toBe(true);
    expect(pane.querySelectorAll("rect.bar")).toHaveLength(2);
    expect(pane.querySelector(".legend")?.textContent).toContain("AVG_VIBRATION");
    const ticks = [...pane.querySelectorAll("text.tick")].map((t) => t.textContent);
    expect(ticks).toEqual(["A", "B"]);
  });

  it("skips null values but keeps the category tick", () => {
    const pane = document.createElement("div");
    const withNull: QueryResult = {
      ...chartable,
      rows: [
        ["A", 3.0],
        ["B", null],
      ],
    };
    expect(renderResultChart(pane, withNull)).toBe(true);
    expect(pane.querySelectorAll("rect.bar")).toHaveLength(1);
    expect(pane.querySelectorAll("text.tick")).toHaveLength(2);
  });

  it("explains an unchartable shape", () => {
    const pane = document.createElement("div");
    const single: QueryResult = {
      columns: [{ name: "COUNT(*)", type: "int64" }],
      rows: [[42]],
      elapsed_ms: 0.5,
    };
    expect(renderResultChart(pane, single)).toBe(false);
    expect(pane.textContent).toContain("no chartable shape");
  });
});
