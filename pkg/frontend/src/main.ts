import { TrialApi } from "./api.js";
import { DomUi } from "./dom.js";
import { browserHooks, SessionRunner } from "./runner.js";

function serverBase(params: URLSearchParams): string {
  return params.get("server") ?? window.location.origin;
}

function renderStartForm(root: HTMLElement, api: TrialApi): void {
  root.innerHTML = `
    <h1 class="prompt">Start a session</h1>
    <form class="start-form">
      <label>Plan id <input name="plan" required></label>
      <label>Participant <input name="participant" required></label>
      <label>Seed <input name="seed" type="number" value="1" required></label>
      <button type="submit">Begin</button>
    </form>`;
  const form = root.querySelector("form") as HTMLFormElement;
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const data = new FormData(form);
    try {
      const info = await api.createSession(
        String(data.get("plan")),
        String(data.get("participant")),
        Number(data.get("seed")),
      );
      const next = new URL(window.location.href);
      next.searchParams.set("session", info.session_id);
      window.location.assign(next.toString());
    } catch (err) {
      const ui = new DomUi(root);
      ui.showError(String(err), false);
    }
  });
}

async function start(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const params = new URLSearchParams(window.location.search);
  const api = new TrialApi(serverBase(params));
  const sessionId = params.get("session");
  if (!sessionId) {
    renderStartForm(root, api);
    return;
  }
  const runner = new SessionRunner(api, sessionId, new DomUi(root), browserHooks());
  await runner.run();
}

void start();
