// DOM layer: renders a PanelView and forwards clicks to the controller.
// Payloads are always set through textContent, never markup.

import { AnnotatorController, PanelView } from "./controller.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderBanner(view: PanelView, controller: AnnotatorController) {
  const banner = el("div", `banner ${view.phase}`, view.banner);
  const { answered, expected } = controller.progress();
  const progress =
    expected === null
      ? `${answered} answered`
      : `${answered} answered of ~${Math.round(expected)} expected`;
  banner.appendChild(el("span", "progress", progress));
  if (view.lastError) {
    banner.appendChild(el("span", "error", view.lastError));
  }
  return banner;
}

function renderPair(view: PanelView, controller: AnnotatorController) {
  const query = view.query!;
  const box = el("div", view.query!.repair ? "pair repair-prompt" : "pair");
  box.appendChild(el("div", "payload", query.u_item.payload));
  box.appendChild(el("div", "payload", query.v_item.payload));
  const same = el("button", "same", "Same");
  const different = el("button", "different", "Different");
  same.disabled = different.disabled = view.busy;
  same.addEventListener("click", () => void controller.answer(true));
  different.addEventListener("click", () => void controller.answer(false));
  const buttons = el("div", "buttons");
  buttons.appendChild(same);
  buttons.appendChild(different);
  box.appendChild(buttons);
  return box;
}

function renderClusters(view: PanelView) {
  const session = view.session!;
  const list = el("ul", "clusters");
  session.blocks.forEach((block, i) => {
    const entry = el("li", "cluster");
    const name = session.labels?.[String(i)] ?? `cluster ${i + 1}`;
    entry.appendChild(el("strong", undefined, name));
    entry.appendChild(
      el(
        "span",
        "members",
        block.map((idx) => session.items[idx].payload).join(", "),
      ),
    );
    list.appendChild(entry);
  });
  return list;
}

function renderLabelForm(view: PanelView, controller: AnnotatorController) {
  const session = view.session!;
  const form = el("div", "label-form");
  session.blocks.forEach((block, i) => {
    const row = el("div", "label-row");
    row.appendChild(
      el(
        "span",
        "members",
        block.map((idx) => session.items[idx].payload).join(", "),
      ),
    );
    const input = el("input", "label-input");
    input.placeholder = `name for cluster ${i + 1}`;
    input.value = view.labelDraft[String(i)] ?? "";
    input.addEventListener("input", () =>
      controller.setLabel(i, input.value),
    );
    row.appendChild(input);
    form.appendChild(row);
  });
  if (view.labelError) {
    form.appendChild(el("div", "error", view.labelError));
  }
  const save = el("button", "finalize", "Save labels");
  save.disabled = view.busy;
  save.addEventListener("click", () => void controller.finalize());
  form.appendChild(save);
  return form;
}

function renderExport(view: PanelView) {
  const box = el("div", "export readonly");
  box.appendChild(el("div", "notice", "Exported labels (read-only)"));
  const pre = el("pre", "export-json");
  pre.textContent = JSON.stringify(view.exported, null, 2);
  box.appendChild(pre);
  return box;
}

export function render(
  root: HTMLElement,
  view: PanelView,
  controller: AnnotatorController,
): void {
  root.replaceChildren();
  root.appendChild(renderBanner(view, controller));
  switch (view.phase) {
    case "answering":
    case "repairing":
      root.appendChild(renderPair(view, controller));
      root.appendChild(renderClusters(view));
      break;
    case "waiting":
      root.appendChild(renderClusters(view));
      break;
    case "labeling":
      root.appendChild(renderLabelForm(view, controller));
      break;
    case "exported":
      root.appendChild(renderClusters(view));
      root.appendChild(renderExport(view));
      break;
    case "loading":
    case "escalated":
    case "error":
      break;
  }
}

export function mount(
  root: HTMLElement,
  controller: AnnotatorController,
  intervalMs = 1000,
): void {
  controller.onChange((view) => render(root, view, controller));
  controller.start(intervalMs);
}
