// Wire contract: JSON events pushed by the session service over the
// WebSocket stream (and mirrored by GET /sessions/{id}/events).

export interface ServerEvent {
  event: string;
  [key: string]: unknown;
}

export interface RegistryDoc {
  threshold: number;
  commands: Record<string, string[]>;
}

export interface CreateSessionResponse {
  id: string;
  first_question: string;
}

export function asNumberArray(value: unknown): number[] {
  return Array.isArray(value) ? value.filter((v): v is number => typeof v === "number") : [];
}

export function asString(value: unknown, fallback = ""): string {
  return typeof value === "string" ? value : fallback;
}
