// Application wiring: toolbar on top, the two live rate charts, the sensor
// config area (toggled by the middle button), then the query console.

import { ApiClient, MetricsStream, type EventSourceFactory, type MetricsFrame } from "./api.js";
import { createLineChart } from "./charts.js";
import { createConfigPanel } from "./configPanel.js";
import { createQueryConsole } from "./queryConsole.js";
import { createToolbar } from "./toolbar.js";

export interface App {
  el: HTMLElement;
  frameCount(): number;
}

export function createApp(api: ApiClient, esFactory?: EventSourceFactory): App {
  const el = document.createElement("div");
  el.className = "app";

  const banner = document.createElement("div");
  banner.className = "banner";
  banner.hidden = true;
  const showError = (message: string) => {
    banner.hidden = false;
    banner.textContent = message;
    setTimeout(() => (banner.hidden = true), 5000);
  };

  const configPanel = createConfigPanel(api);
  const toolbar = createToolbar(api, showError, () => {
    configPanel.el.hidden = !configPanel.el.hidden;
    if (!configPanel.el.hidden) void configPanel.load();
  });

  const businessChart = createLineChart("business rows/s", "#4c78a8");
  const sensorChart = createLineChart("sensor rows/s", "#f58518");
  const chartsRow = document.createElement("div");
  chartsRow.className = "charts-row";
  chartsRow.append(businessChart.el, sensorChart.el);

  const queryConsole = createQueryConsole(api);

  let frames = 0;
  const stream = new MetricsStream(
    (frame: MetricsFrame) => {
      frames += 1;
      businessChart.append(frame.business_rows_per_s);
      sensorChart.append(frame.sensor_rows_per_s);
    },
    (status) => {
      if (status === "down") showError("metrics stream lost; retrying");
      banner.dataset.stream = status;
    },
    esFactory,
  );
  stream.connect();

  void toolbar.refresh();

  el.append(banner, toolbar.el, chartsRow, configPanel.el, queryConsole.el);
  return { el, frameCount: () => frames };
}
