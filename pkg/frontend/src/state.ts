// Session view state as a pure projection of the server event stream.
// applyEvent never mutates its input, so replaying a recorded log always
// reproduces the same view; no business logic lives on the client.

import { ServerEvent, asNumberArray, asString } from "./events.js";

export type QuestionStatus = "pending" | "answered" | "skipped";

export interface QuestionCard {
  id: number;
  text: string;
  status: QuestionStatus;
}

export interface Toast {
  cue: string;
  message: string;
}

export interface SessionView {
  sessionId: string | null;
  questions: QuestionCard[];
  activeId: number | null;
  phase: "drafting" | "revision" | "paused" | "done";
  listening: boolean;
  playback: "idle" | "playing" | "stopped";
  draft: string | null;
  draftTone: string | null;
  passesUsed: number | null;
  toasts: Toast[];
  errors: string[];
  finished: boolean;
}

const MAX_TOASTS = 5;

export function initialView(): SessionView {
  return {
    sessionId: null,
    questions: [],
    activeId: null,
    phase: "drafting",
    listening: true,
    playback: "idle",
    draft: null,
    draftTone: null,
    passesUsed: null,
    toasts: [],
    errors: [],
    finished: false,
  };
}

function withStatus(view: SessionView, ids: number[], status: QuestionStatus): SessionView {
  return {
    ...view,
    questions: view.questions.map((q) => (ids.includes(q.id) ? { ...q, status } : q)),
  };
}

export function applyEvent(view: SessionView, ev: ServerEvent): SessionView {
  switch (ev.event) {
    case "session_created":
      return { ...view, sessionId: asString(ev.id, null as unknown as string) || null };
    case "question_added": {
      const id = asNumberArray(ev.ids)[0];
      if (id === undefined) return view;
      const card: QuestionCard = { id, text: asString(ev.question), status: "pending" };
      return { ...view, questions: [...view.questions, card], activeId: id, finished: false };
    }
    case "question": {
      const id = typeof ev.id === "number" ? ev.id : null;
      return id === null ? view : { ...view, activeId: id };
    }
    case "answer_set":
      return withStatus(view, asNumberArray(ev.ids), "answered");
    case "question_skipped":
      return withStatus(view, asNumberArray(ev.ids), "skipped");
    case "turns_removed": {
      const removed = asNumberArray(ev.ids);
      const questions = view.questions.filter((q) => !removed.includes(q.id));
      const activeId =
        view.activeId !== null && removed.includes(view.activeId)
          ? questions.length
            ? questions[questions.length - 1].id
            : null
          : view.activeId;
      return { ...view, questions, activeId };
    }
    case "cursor_moved": {
      const id = asNumberArray(ev.ids)[0];
      return id === undefined ? view : { ...view, activeId: id };
    }
    case "finished":
      return { ...view, finished: true };
    case "phase_changed": {
      const phase = asString(ev.phase, view.phase) as SessionView["phase"];
      return { ...view, phase, listening: phase !== "paused" && phase !== "done" };
    }
    case "status_cue": {
      const toast: Toast = { cue: asString(ev.cue), message: asString(ev.message) };
      return { ...view, toasts: [...view.toasts, toast].slice(-MAX_TOASTS) };
    }
    case "playback_event": {
      const state = asString(ev.state);
      const playback = state === "started" ? "playing" : state === "stopped" ? "stopped" : view.playback;
      return { ...view, playback };
    }
    case "draft_ready":
      return {
        ...view,
        draft: asString(ev.text),
        draftTone: asString(ev.tone, null as unknown as string) || null,
        passesUsed: typeof ev.passes_used === "number" ? ev.passes_used : null,
      };
    case "error":
      return { ...view, errors: [...view.errors, asString(ev.message)] };
    default:
      return view; // unknown events are forward-compatible no-ops
  }
}

export function projectLog(events: ServerEvent[]): SessionView {
  return events.reduce((view, ev) => applyEvent(view, ev), initialView());
}
