// Run toggle: the button label always reflects the server-confirmed state,
// never the optimistic click.

import type { ApiClient } from "./api.js";

export interface Toolbar {
  el: HTMLElement;
  running(): boolean;
  refresh(): Promise<void>;
}

export function createToolbar(
  api: ApiClient,
  onError: (message: string) => void,
  onToggleConfig: () => void,
): Toolbar {
  let running = false;
  let busy = false;

  const el = document.createElement("div");
  el.className = "toolbar";
  const toggle = document.createElement("button");
  toggle.className = "run-toggle";
  const configButton = document.createElement("button");
  configButton.textContent = "Sensor Config";
  configButton.className = "config-toggle";
  configButton.addEventListener("click", onToggleConfig);
  el.append(toggle, configButton);

  function render(): void {
    toggle.textContent = running ? "Stop" : "Start";
    toggle.dataset.running = String(running);
  }

  toggle.addEventListener("click", async () => {
    if (busy) return; // serialize; the final state is the last server response
    busy = true;
    toggle.disabled = true;
    try {
      running = await api.setRunning(!running);
    } catch (err) {
      onError(`simulation control failed: ${String(err)}`);
    } finally {
      busy = false;
      toggle.disabled = false;
      render();
    }
  });

  render();
  return {
    el,
    running: () => running,
    async refresh(): Promise<void> {
      try {
        running = (await api.simStatus()).running;
      } catch (err) {
        onError(`cannot reach server: ${String(err)}`);
      }
      render();
    },
  };
}
