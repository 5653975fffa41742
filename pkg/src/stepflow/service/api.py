"""HTTP + WebSocket surface consumed by the UI.

HTTP:
    POST /sessions {task_kind, original_text?} -> {id, first_question}
    GET  /sessions/{id}                         -> full snapshot
    POST /sessions/{id}/transcript {text}       -> routed effect (text mode)
    POST /sessions/{id}/editor {text}           -> manual revision save
    GET  /sessions/{id}/draft                   -> final draft
    GET  /sessions/{id}/events                  -> recorded event log
    GET  /registry                              -> command registry document

WebSocket /sessions/{id}/stream:
    up:   binary frames = 16 kHz mono PCM audio; JSON text frames =
          {"type": "transcript"|"envelope", ...} for hybrid/fixture input
    down: JSON events {question|status_cue|playback_event|draft_ready|error|...}
"""

from __future__ import annotations

import asyncio
import struct

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from ..errors import StepflowError, UnknownSessionError
from ..segmentation import Segmenter, SegmenterConfig
from .session import SessionManager


class CreateSessionRequest(BaseModel):
    task_kind: str
    original_text: str | None = None


class TranscriptRequest(BaseModel):
    text: str


class EditorRequest(BaseModel):
    text: str


def build_app(manager: SessionManager) -> FastAPI:
    app = FastAPI(title="stepflow", version="0.1.0")
    app.state.manager = manager

    @app.post("/sessions")
    def create_session(request: CreateSessionRequest):
        try:
            session = manager.create_session(request.task_kind, request.original_text)
        except (ValueError, StepflowError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"id": session.id, "first_question": session.graph.turns[0].question}

    def _session_or_404(session_id: str):
        try:
            return manager.resume_session(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_or_404(session_id).to_dict()

    @app.post("/sessions/{session_id}/transcript")
    def post_transcript(session_id: str, request: TranscriptRequest):
        session = _session_or_404(session_id)
        return manager.handle_transcript(session, request.text)

    @app.post("/sessions/{session_id}/editor")
    def post_editor(session_id: str, request: EditorRequest):
        session = _session_or_404(session_id)
        manager.save_editor_text(session, request.text)
        return {"saved": True}

    @app.get("/sessions/{session_id}/draft")
    def get_draft(session_id: str):
        session = _session_or_404(session_id)
        if session.draft is None:
            raise HTTPException(status_code=404, detail="no draft yet")
        return session.draft.to_dict()

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str):
        _session_or_404(session_id)
        return manager.event_log(session_id)

    @app.get("/registry")
    def get_registry():
        return manager.registry.to_document()

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        await websocket.accept()
        try:
            session = manager.resume_session(session_id)
        except UnknownSessionError:
            await websocket.send_json({"event": "error", "message": "unknown session"})
            await websocket.close()
            return

        runtime_config = SegmenterConfig(
            thinking_window_ms=manager.config.thinking_window_ms
        )
        segmenter = Segmenter(runtime_config)
        gateway = manager.gateway_for(session_id)

        queue: asyncio.Queue = asyncio.Queue()
        loop = asyncio.get_event_loop()

        def forward(event: dict) -> None:
            loop.call_soon_threadsafe(queue.put_nowait, event)

        manager.subscribe(session_id, forward)

        async def sender():
            while True:
                event = await queue.get()
                await websocket.send_json(event)

        sender_task = asyncio.create_task(sender())
        try:
            while True:
                message = await websocket.receive()
                if message.get("type") == "websocket.disconnect":
                    break
                events = []
                if message.get("bytes") is not None:
                    samples = _pcm16_to_floats(message["bytes"])
                    events = segmenter.feed_pcm(samples, _next_ts(segmenter, runtime_config))
                elif message.get("text") is not None:
                    import json as _json

                    payload = _json.loads(message["text"])
                    if payload.get("type") == "transcript":
                        manager.handle_transcript(session, payload["text"])
                        continue
                    if payload.get("type") == "envelope":
                        events = segmenter.feed_energy(payload["energy"], payload["t_ms"])
                for event in events:
                    if event.kind == "speech_start":
                        manager.notify_speech_start(session, event.start_ms)
                    elif event.kind == "utterance_complete":
                        audio = segmenter.utterance_audio(event.audio_ref)
                        # envelope fixtures carry no samples; the mock
                        # transcriber is keyed by utterance index anyway
                        pcm = _floats_to_pcm16(audio) if audio else b"\x00\x00"
                        transcript = gateway.transcribe(pcm)
                        manager.handle_transcript(session, transcript)
        except WebSocketDisconnect:
            pass
        finally:
            sender_task.cancel()
            manager.unsubscribe(session_id, forward)

    return app


def _pcm16_to_floats(raw: bytes) -> list[float]:
    count = len(raw) // 2
    ints = struct.unpack(f"<{count}h", raw[: count * 2])
    return [value / 32768.0 for value in ints]


def _floats_to_pcm16(samples: list[float]) -> bytes:
    clipped = (max(-1.0, min(1.0, s)) for s in samples)
    return struct.pack(f"<{len(samples)}h", *(int(s * 32767) for s in clipped))


def _next_ts(segmenter: Segmenter, config: SegmenterConfig) -> int:
    last = segmenter.last_timestamp_ms
    return 0 if last is None else last + config.frame_ms
