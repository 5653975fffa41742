// Server transport. The UI talks only to the session-service HTTP/WS API;
// everything it knows arrives as events through onEvent.

import { CreateSessionResponse, RegistryDoc, ServerEvent } from "./events.js";

export interface Transport {
  createSession(taskKind: string, originalText?: string): Promise<CreateSessionResponse>;
  connect(sessionId: string): Promise<void>;
  sendTranscript(text: string): Promise<void>;
  saveEditor(text: string): Promise<void>;
  sendEnvelope(tMs: number, energy: number): void;
  sendAudioFrame(frame: ArrayBuffer): void;
  fetchRegistry(): Promise<RegistryDoc>;
  fetchEventLog(sessionId: string): Promise<ServerEvent[]>;
  onEvent(listener: (ev: ServerEvent) => void): void;
}

export class HttpTransport implements Transport {
  private listeners: Array<(ev: ServerEvent) => void> = [];
  private socket: WebSocket | null = null;
  private sessionId: string | null = null;

  constructor(private baseUrl: string = "") {}

  private wsUrl(sessionId: string): string {
    const base = this.baseUrl || window.location.origin;
    return `${base.replace(/^http/, "ws")}/sessions/${sessionId}/stream`;
  }

  private async postJson(path: string, body: unknown): Promise<unknown> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new Error(`${path} failed: ${response.status}`);
    }
    return response.json();
  }

  async createSession(taskKind: string, originalText?: string): Promise<CreateSessionResponse> {
    return (await this.postJson("/sessions", {
      task_kind: taskKind,
      original_text: originalText ?? null,
    })) as CreateSessionResponse;
  }

  async connect(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    await new Promise<void>((resolve, reject) => {
      const socket = new WebSocket(this.wsUrl(sessionId));
      socket.onopen = () => resolve();
      socket.onerror = () => reject(new Error("websocket failed"));
      socket.onmessage = (message) => {
        const event = JSON.parse(message.data as string) as ServerEvent;
        for (const listener of this.listeners) listener(event);
      };
      this.socket = socket;
    });
  }

  async sendTranscript(text: string): Promise<void> {
    if (!this.sessionId) throw new Error("no session");
    await this.postJson(`/sessions/${this.sessionId}/transcript`, { text });
  }

  async saveEditor(text: string): Promise<void> {
    if (!this.sessionId) throw new Error("no session");
    await this.postJson(`/sessions/${this.sessionId}/editor`, { text });
  }

  sendEnvelope(tMs: number, energy: number): void {
    this.socket?.send(JSON.stringify({ type: "envelope", t_ms: tMs, energy }));
  }

  sendAudioFrame(frame: ArrayBuffer): void {
    this.socket?.send(frame);
  }

  async fetchRegistry(): Promise<RegistryDoc> {
    const response = await fetch(`${this.baseUrl}/registry`);
    return (await response.json()) as RegistryDoc;
  }

  async fetchEventLog(sessionId: string): Promise<ServerEvent[]> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/events`);
    return (await response.json()) as ServerEvent[];
  }

  onEvent(listener: (ev: ServerEvent) => void): void {
    this.listeners.push(listener);
  }
}
