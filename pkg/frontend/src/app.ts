// Application glue: fold server events into the view, re-render, and wire
// the command palette, hybrid text input, editor save, and mic streaming.

import { drawWaveformBar, startMicStream } from "./audio.js";
import { ServerEvent } from "./events.js";
import { buildPalette } from "./palette.js";
import { SessionView, applyEvent, initialView } from "./state.js";
import { Transport } from "./transport.js";
import { renderApp } from "./view.js";

export interface App {
  view(): SessionView;
  recordedEvents(): ServerEvent[];
  sendCommand(phrase: string): Promise<void>;
  sendText(text: string): Promise<void>;
  saveEditor(text: string): Promise<void>;
}

export async function startApp(
  root: HTMLElement,
  transport: Transport,
  taskKind: string,
  originalText?: string,
): Promise<App> {
  let view = initialView();
  const recorded: ServerEvent[] = [];

  const rerender = () => renderApp(root, view);
  transport.onEvent((ev) => {
    recorded.push(ev);
    view = applyEvent(view, ev);
    rerender();
  });

  const session = await transport.createSession(taskKind, originalText);
  await transport.connect(session.id);

  const registry = await transport.fetchRegistry();
  const palette = buildPalette(registry, (phrase) => {
    void transport.sendTranscript(phrase);
  });
  root.prepend(palette);

  const textForm = document.createElement("form");
  textForm.className = "text-mode";
  const input = document.createElement("input");
  input.type = "text";
  input.placeholder = "type an answer (hybrid mode)";
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "send";
  textForm.append(input, submit);
  textForm.addEventListener("submit", (ev) => {
    ev.preventDefault();
    if (input.value.trim()) {
      void transport.sendTranscript(input.value.trim());
      input.value = "";
    }
  });
  root.appendChild(textForm);

  const waveform = document.createElement("div");
  waveform.className = "waveform-bar";
  root.appendChild(waveform);

  if (typeof navigator !== "undefined" && navigator.mediaDevices !== undefined) {
    try {
      await startMicStream(
        (frame) => transport.sendAudioFrame(frame),
        (level) => drawWaveformBar(waveform, level),
      );
    } catch {
      // no microphone available: hybrid text mode still works
    }
  }

  rerender();
  return {
    view: () => view,
    recordedEvents: () => [...recorded],
    sendCommand: (phrase) => transport.sendTranscript(phrase),
    sendText: (text) => transport.sendTranscript(text),
    saveEditor: (text) => transport.saveEditor(text),
  };
}
