import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.querySelector<HTMLDivElement>("#app");
if (root) {
  root.append(createApp(new ApiClient()).el);
}
