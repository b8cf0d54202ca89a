// Query console: predefined-query buttons (they load their SQL into the
// editor before running so it stays adaptable), a free-form editor, the
// result chart, and the result table. At most one query is in flight; a new
// submission cancels the previous one.

import type { ApiClient, PredefinedEntry, QueryResult } from "./api.js";
import { renderResultChart } from "./charts.js";
import { renderResultTable } from "./table.js";

export interface QueryConsole {
  el: HTMLElement;
  run(sql?: string): Promise<void>;
  editorText(): string;
  setEditorText(sql: string): void;
  lastResult(): QueryResult | null;
}

export function createQueryConsole(api: ApiClient): QueryConsole {
  let inflight: AbortController | null = null;
  let lastResult: QueryResult | null = null;

  const el = document.createElement("div");
  el.className = "query-console";
  const buttons = document.createElement("div");
  buttons.className = "predefined-buttons";
  const chartPane = document.createElement("div");
  chartPane.className = "chart-pane";
  const tablePane = document.createElement("div");
  tablePane.className = "table-pane";
  const errorPane = document.createElement("div");
  errorPane.className = "query-error";
  const editor = document.createElement("textarea");
  editor.className = "sql-editor";
  editor.rows = 6;
  editor.spellcheck = false;
  const runButton = document.createElement("button");
  runButton.textContent = "Run query";
  runButton.className = "run-query";
  el.append(buttons, chartPane, tablePane, errorPane, editor, runButton);

  async function run(sql?: string): Promise<void> {
    if (sql !== undefined) editor.value = sql;
    const text = editor.value;
    if (!text.trim()) return;
    inflight?.abort();
    const controller = new AbortController();
    inflight = controller;
    errorPane.replaceChildren();
    let outcome;
    try {
      outcome = await api.query(text, controller.signal);
    } catch (err) {
      if (controller.signal.aborted) return; // superseded by a newer run
      errorPane.textContent = `request failed: ${String(err)}`;
      return;
    }
    if (controller.signal.aborted) return;
    inflight = null;
    if (!outcome.ok) {
      errorPane.textContent =
        outcome.offset !== null
          ? `${outcome.error} (offset ${outcome.offset})`
          : outcome.error;
      if (outcome.offset !== null) {
        editor.focus();
        editor.setSelectionRange(outcome.offset, Math.min(outcome.offset + 1, text.length));
      }
      return;
    }
    lastResult = outcome.result;
    renderResultChart(chartPane, outcome.result);
    renderResultTable(tablePane, outcome.result);
  }

  runButton.addEventListener("click", () => void run());

  void api.predefined().then((entries: PredefinedEntry[]) => {
    for (const entry of entries) {
      const button = document.createElement("button");
      button.className = "predefined";
      button.dataset.name = entry.name;
      button.textContent = entry.name;
      button.title = entry.description;
      button.addEventListener("click", () => void run(entry.sql));
      buttons.append(button);
    }
  });

  return {
    el,
    run,
    editorText: () => editor.value,
    setEditorText(sql: string): void {
      editor.value = sql;
    },
    lastResult: () => lastResult,
  };
}
