// Clickable mirror of the voice command set: one button per registered
// command (built-ins and custom macros alike), labeled with its first
// phrase. Clicking sends that phrase as a transcript, so the button path
// exercises exactly the same server-side recognition as speech.

import { RegistryDoc } from "./events.js";

export function buildPalette(
  registry: RegistryDoc,
  onCommand: (phrase: string, commandId: string) => void,
): HTMLElement {
  const palette = document.createElement("nav");
  palette.className = "command-palette";
  for (const [commandId, phrases] of Object.entries(registry.commands)) {
    if (!phrases.length) continue;
    const button = document.createElement("button");
    button.type = "button";
    button.dataset.command = commandId;
    button.textContent = phrases[0];
    button.addEventListener("click", () => onCommand(phrases[0], commandId));
    palette.appendChild(button);
  }
  return palette;
}
