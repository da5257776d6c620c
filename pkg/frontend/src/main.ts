/** Browser bootstrap: setup form, session controller, resume support. */

import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";

function symbols(raw: string): string[] {
  return raw
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}

function init(): void {
  const form = document.getElementById("setup-form") as HTMLFormElement;
  const sessionRoot = document.getElementById("session-root") as HTMLElement;
  const statusLine = document.getElementById("status-line") as HTMLElement;

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const baseUrl = String(data.get("service") || "http://127.0.0.1:8423");
    const observations = symbols(String(data.get("observations") || ""));
    const actionSymbols = symbols(String(data.get("actions") || ""));
    const epsilon = Number(data.get("epsilon") || "1e-6");
    const resumeId = String(data.get("resume") || "").trim();

    const controller = new SessionController(new ApiClient(baseUrl), sessionRoot);
    controller.mount(sessionRoot);
    const started = resumeId
      ? controller.resume(resumeId)
      : controller.start(
          { observations, actions: actionSymbols.length ? actionSymbols : null },
          epsilon,
        );
    started
      .then((view) => {
        statusLine.textContent = `session ${view.id} (${view.status})`;
      })
      .catch((error: Error) => {
        statusLine.textContent = error.message;
      });
  });
}

document.addEventListener("DOMContentLoaded", init);
