// Result-table rendering with explicit null markers.

import type { QueryResult } from "./api.js";

export function renderResultTable(container: HTMLElement, result: QueryResult): void {
  container.replaceChildren();
  const table = document.createElement("table");
  table.className = "result-table";
  const head = document.createElement("tr");
  for (const column of result.columns) {
    const th = document.createElement("th");
    th.textContent = column.name;
    th.title = column.type;
    head.append(th);
  }
  table.append(head);
  for (const row of result.rows) {
    const tr = document.createElement("tr");
    for (const value of row) {
      const td = document.createElement("td");
      if (value === null) {
        td.textContent = "NULL";
        td.className = "null";
      } else {
        td.textContent = typeof value === "number" ? formatNumber(value) : value;
      }
      tr.append(td);
    }
    table.append(tr);
  }
  const meta = document.createElement("div");
  meta.className = "result-meta";
  meta.textContent = `${result.rows.length} row${result.rows.length === 1 ? "" : "s"} in ${result.elapsed_ms.toFixed(1)} ms`;
  container.append(table, meta);
}

function formatNumber(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(4);
}
