// Browser bootstrap: wires the state machine to the DOM. All game logic
// lives in state.ts/view.ts, which the test suite drives without a DOM.

import { ApiClient, type FetchLike } from "./api.js";
import { GameClient, type SessionStore } from "./state.js";
import { renderHtml, renderView } from "./view.js";

function browserStore(): SessionStore {
  return {
    get: (key) => window.localStorage.getItem(key),
    set: (key, value) => window.localStorage.setItem(key, value),
    remove: (key) => window.localStorage.removeItem(key),
  };
}

function baseUrl(): string {
  const meta = document.querySelector('meta[name="persuasim-base-url"]');
  const fromMeta = meta?.getAttribute("content");
  const fromGlobal = (window as { PERSUASIM_BASE_URL?: string }).PERSUASIM_BASE_URL;
  return (fromGlobal ?? fromMeta ?? "").replace(/\/$/, "");
}

function boot(): void {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app container");

  const api = new ApiClient(baseUrl(), fetch.bind(window) as FetchLike);
  const client = new GameClient(api, browserStore());

  function render(): void {
    if (root === null) return;
    root.innerHTML = renderHtml(renderView(client.state));

    const form = document.getElementById("start-form");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      const alias = (document.getElementById("alias") as HTMLInputElement).value;
      void client.start(alias);
    });
    document.getElementById("go")?.addEventListener("click", () => {
      void client.submit("go");
    });
    document.getElementById("dont-go")?.addEventListener("click", () => {
      void client.submit("dont_go");
    });
    document.getElementById("continue")?.addEventListener("click", () => {
      void client.continueNext();
    });
    document.getElementById("retry")?.addEventListener("click", () => {
      void client.retry();
    });
  }

  client.subscribe(render);
  render();
  void client.resume();
}

boot();
