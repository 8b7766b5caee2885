// Entry point: joins the session named in the URL, or shows a small
// create-session form when none is given.

import { ApiClient } from "./api.js";
import { AnnotatorController } from "./controller.js";
import { mount } from "./dom.js";

function randomToken(): string {
  return `tab-${Math.random().toString(36).slice(2, 10)}`;
}

function showCreateForm(root: HTMLElement, client: ApiClient): void {
  const form = document.createElement("div");
  form.className = "create-form";
  form.innerHTML = `
    <h2>New annotation session</h2>
    <textarea id="items" rows="8" placeholder="one item per line"></textarea>
    <select id="strategy">
      <option value="chordal-any">chordal-any</option>
      <option value="clique">clique</option>
      <option value="universal">universal</option>
      <option value="random">random</option>
    </select>
    <label><input type="checkbox" id="plan" checked> verify answers (redundancy)</label>
    <button id="go">Start</button>
    <div class="error" id="err"></div>
  `;
  root.replaceChildren(form);
  const button = form.querySelector("#go") as HTMLButtonElement;
  button.addEventListener("click", async () => {
    const text = (form.querySelector("#items") as HTMLTextAreaElement).value;
    const items = text
      .split("\n")
      .map((line) => line.trim())
      .filter((line) => line.length > 0);
    const strategy = (form.querySelector("#strategy") as HTMLSelectElement)
      .value;
    const plan = (form.querySelector("#plan") as HTMLInputElement).checked
      ? { r: 2 }
      : null;
    try {
      const session = await client.createSession({ items, strategy, plan });
      const params = new URLSearchParams(window.location.search);
      params.set("session", session.id);
      window.location.search = params.toString();
    } catch (err) {
      (form.querySelector("#err") as HTMLElement).textContent = String(err);
    }
  });
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "";
  const client = new ApiClient(base);
  const sessionId = params.get("session");
  if (!sessionId) {
    showCreateForm(root, client);
    return;
  }
  const annotator = params.get("annotator") ?? randomToken();
  const controller = new AnnotatorController(client, sessionId, annotator);
  mount(root, controller);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
