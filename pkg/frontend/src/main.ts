import { ApiClient } from "./api.js";
import { mountApp } from "./app.js";

declare global {
  interface Window {
    TITLEFORGE_API_BASE?: string;
  }
}

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? window.TITLEFORGE_API_BASE ?? "";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app root");
const app = mountApp(root, new ApiClient(base));
void app.loadLanguages();
