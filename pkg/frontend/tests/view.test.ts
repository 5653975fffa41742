import { describe, expect, it } from "vitest";

import { applyEvent, initialView, projectLog } from "../src/state.js";
import { renderApp, renderEditorView, renderQaView } from "../src/view.js";

function container(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

describe("qa view", () => {
  it("adds a card per question and highlights the active one", () => {
    const view = projectLog([
      { event: "question_added", ids: [1], question: "First?" },
      { event: "answer_set", ids: [1] },
      { event: "question_added", ids: [2], question: "Second?" },
    ]);
    const root = container();
    renderQaView(root, view);
    const cards = root.querySelectorAll(".question-card");
    expect(cards.length).toBe(2);
    expect(cards[1].classList.contains("active")).toBe(true);
    expect(cards[0].classList.contains("answered")).toBe(true);
  });

  it("dims skipped questions", () => {
    const view = projectLog([
      { event: "question_added", ids: [1], question: "First?" },
      { event: "question_skipped", ids: [1] },
    ]);
    const root = container();
    renderQaView(root, view);
    expect(root.querySelector(".question-card")!.classList.contains("skipped")).toBe(true);
  });

  it("cards disappear on turns_removed", () => {
    let view = projectLog([
      { event: "question_added", ids: [1], question: "First?" },
      { event: "question_added", ids: [2], question: "Second?" },
    ]);
    const root = container();
    renderQaView(root, view);
    expect(root.querySelectorAll(".question-card").length).toBe(2);
    view = applyEvent(view, { event: "turns_removed", ids: [2] });
    renderQaView(root, view);
    expect(root.querySelectorAll(".question-card").length).toBe(1);
  });
});

describe("editor view", () => {
  it("shows a placeholder before any draft exists", () => {
    const root = container();
    renderEditorView(root, initialView());
    expect(root.querySelector(".draft-preview")!.textContent).toContain("no draft yet");
  });

  it("populates editor and preview on draft_ready", () => {
    const view = applyEvent(initialView(), {
      event: "draft_ready",
      text: "Dear all, welcome!",
      tone: "friendly",
      passes_used: 1,
    });
    const root = container();
    renderEditorView(root, view);
    expect(root.querySelector<HTMLTextAreaElement>(".draft-editor")!.value).toBe(
      "Dear all, welcome!",
    );
    expect(root.querySelector(".draft-preview")!.textContent).toBe("Dear all, welcome!");
    expect(root.querySelector(".draft-tone")!.textContent).toContain("friendly");
  });
});

describe("full app render", () => {
  it("switches between qa and editor views by phase", () => {
    let view = projectLog([{ event: "question_added", ids: [1], question: "Q?" }]);
    const root = container();
    renderApp(root, view);
    expect(root.querySelector<HTMLElement>(".qa-view")!.hidden).toBe(false);
    expect(root.querySelector<HTMLElement>(".editor-view")!.hidden).toBe(true);
    view = applyEvent(view, { event: "phase_changed", phase: "revision" });
    renderApp(root, view);
    expect(root.querySelector<HTMLElement>(".qa-view")!.hidden).toBe(true);
    expect(root.querySelector<HTMLElement>(".editor-view")!.hidden).toBe(false);
  });

  it("renders toasts and error text", () => {
    let view = initialView();
    view = applyEvent(view, { event: "status_cue", cue: "moving_to_next_question", message: "Moving to next question" });
    view = applyEvent(view, { event: "error", message: "no draft yet" });
    const root = container();
    renderApp(root, view);
    expect(root.querySelector(".toast-moving_to_next_question")!.textContent).toBe(
      "Moving to next question",
    );
    expect(root.querySelector(".errors")!.textContent).toBe("no draft yet");
  });
});
