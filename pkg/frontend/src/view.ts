// DOM projection of a SessionView. Full idempotent re-render: the same view
// always yields the same markup, which the tests rely on.

import { SessionView } from "./state.js";

export function renderQaView(container: HTMLElement, view: SessionView): void {
  container.innerHTML = "";
  const list = document.createElement("ol");
  list.className = "question-list";
  for (const question of view.questions) {
    const item = document.createElement("li");
    item.className = `question-card ${question.status}`;
    if (question.id === view.activeId) item.classList.add("active");
    item.dataset.id = String(question.id);
    const label = document.createElement("span");
    label.className = "question-text";
    label.textContent = question.text;
    const badge = document.createElement("span");
    badge.className = "status-badge";
    badge.textContent = question.status;
    item.append(label, badge);
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderEditorView(container: HTMLElement, view: SessionView): void {
  container.innerHTML = "";
  const preview = document.createElement("div");
  preview.className = "draft-preview";
  preview.textContent = view.draft ?? "(no draft yet — answer a few questions first)";
  const editor = document.createElement("textarea");
  editor.className = "draft-editor";
  editor.value = view.draft ?? "";
  const tone = document.createElement("p");
  tone.className = "draft-tone";
  tone.textContent = view.draftTone
    ? `tone: ${view.draftTone} · fact-check passes: ${view.passesUsed ?? "?"}`
    : "";
  container.append(preview, editor, tone);
}

export function renderStatusBar(container: HTMLElement, view: SessionView): void {
  container.innerHTML = "";
  const phase = document.createElement("span");
  phase.className = `phase-badge phase-${view.phase}`;
  phase.textContent = view.phase;
  const mic = document.createElement("span");
  mic.className = `mic-indicator ${view.listening ? "listening" : "muted"}`;
  mic.textContent = view.listening ? "listening" : "paused";
  const playback = document.createElement("span");
  playback.className = `playback-indicator ${view.playback}`;
  playback.textContent = `tts: ${view.playback}`;
  container.append(phase, mic, playback);

  const toasts = document.createElement("ul");
  toasts.className = "toasts";
  for (const toast of view.toasts) {
    const item = document.createElement("li");
    item.className = `toast toast-${toast.cue}`;
    item.textContent = toast.message || toast.cue;
    toasts.appendChild(item);
  }
  container.appendChild(toasts);

  if (view.errors.length) {
    const errors = document.createElement("p");
    errors.className = "errors";
    errors.textContent = view.errors[view.errors.length - 1];
    container.appendChild(errors);
  }
}

export function renderApp(root: HTMLElement, view: SessionView): void {
  let qa = root.querySelector<HTMLElement>(".qa-view");
  let editor = root.querySelector<HTMLElement>(".editor-view");
  let status = root.querySelector<HTMLElement>(".status-bar");
  if (!qa || !editor || !status) {
    root.innerHTML = "";
    status = document.createElement("div");
    status.className = "status-bar";
    qa = document.createElement("div");
    qa.className = "qa-view";
    editor = document.createElement("div");
    editor.className = "editor-view";
    root.append(status, qa, editor);
  }
  renderStatusBar(status, view);
  renderQaView(qa, view);
  renderEditorView(editor, view);
  qa.hidden = view.phase === "revision";
  editor.hidden = view.phase !== "revision";
}
