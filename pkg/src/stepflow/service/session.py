"""Session lifecycle, phase timing, playback, and transcript routing.

A session is a UUID-indexed document persisted after every mutation, so a
disconnect never loses state. The phase ledger follows the two-phase timing
rule: drafting accumulates until the draft is shown, revision accumulates in
the editor, re-entering the Q&A pauses revision and resumes drafting, and
paused time counts toward neither.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..commands import CommandRegistry, recognize
from ..composer import Composer, ComposerConfig, FinalDraft
from ..errors import (
    BoundaryError,
    IllegalPhaseTransitionError,
    NoActiveQuestionError,
    NothingToComposeError,
    NothingToReplayError,
    StepflowError,
    UnknownSessionError,
)
from ..gateway.providers import (
    Gateway,
    MockBackend,
    ProviderConfig,
    ScriptEntry,
    load_mock_script,
)
from ..memory import MemoryContext, MemoryStore
from ..qa import ConversationGraph, QaEngine
from .config import AppConfig
from .ttscache import TtsCache

PHASES = ("drafting", "revision", "paused", "done")

# legal phase transitions; paused returns to the phase it interrupted
_TRANSITIONS = {
    ("drafting", "revision"),
    ("revision", "drafting"),
    ("drafting", "paused"),
    ("revision", "paused"),
    ("drafting", "done"),
    ("revision", "done"),
}


@dataclass
class PhaseLedger:
    accumulated_drafting_ms: int = 0
    accumulated_revision_ms: int = 0
    accumulated_paused_ms: int = 0
    active_phase: str = "drafting"
    active_phase_started_at: int = 0
    phase_before_pause: str = "drafting"

    def transition(self, new_phase: str, now_ms: int) -> None:
        old = self.active_phase
        if new_phase == old:
            raise IllegalPhaseTransitionError(f"already in phase {old}")
        if old == "paused":
            if new_phase != self.phase_before_pause:
                raise IllegalPhaseTransitionError(
                    f"paused session resumes to {self.phase_before_pause}, not {new_phase}"
                )
        elif (old, new_phase) not in _TRANSITIONS:
            raise IllegalPhaseTransitionError(f"{old} -> {new_phase}")
        elapsed = max(0, now_ms - self.active_phase_started_at)
        if old == "drafting":
            self.accumulated_drafting_ms += elapsed
        elif old == "revision":
            self.accumulated_revision_ms += elapsed
        elif old == "paused":
            self.accumulated_paused_ms += elapsed
        if new_phase == "paused":
            self.phase_before_pause = old
        self.active_phase = new_phase
        self.active_phase_started_at = now_ms

    def to_dict(self) -> dict:
        return {
            "accumulated_drafting_ms": self.accumulated_drafting_ms,
            "accumulated_revision_ms": self.accumulated_revision_ms,
            "accumulated_paused_ms": self.accumulated_paused_ms,
            "active_phase": self.active_phase,
            "active_phase_started_at": self.active_phase_started_at,
            "phase_before_pause": self.phase_before_pause,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseLedger":
        return cls(**data)


@dataclass
class Session:
    id: str
    graph: ConversationGraph
    draft: FinalDraft | None = None
    ledger: PhaseLedger = field(default_factory=PhaseLedger)
    config_snapshot: dict = field(default_factory=dict)
    input_enabled: bool = True
    pending_modify: bool = False
    last_tts_key: str | None = None
    last_tts_text: str | None = None
    editor_text: str | None = None

    @property
    def phase(self) -> str:
        return self.ledger.active_phase

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "graph": self.graph.to_dict(),
            "draft": self.draft.to_dict() if self.draft else None,
            "ledger": self.ledger.to_dict(),
            "config_snapshot": self.config_snapshot,
            "input_enabled": self.input_enabled,
            "pending_modify": self.pending_modify,
            "last_tts_key": self.last_tts_key,
            "last_tts_text": self.last_tts_text,
            "editor_text": self.editor_text,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Session":
        return cls(
            id=data["id"],
            graph=ConversationGraph.from_dict(data["graph"]),
            draft=FinalDraft.from_dict(data["draft"]) if data.get("draft") else None,
            ledger=PhaseLedger.from_dict(data["ledger"]),
            config_snapshot=data.get("config_snapshot", {}),
            input_enabled=data.get("input_enabled", True),
            pending_modify=data.get("pending_modify", False),
            last_tts_key=data.get("last_tts_key"),
            last_tts_text=data.get("last_tts_text"),
            editor_text=data.get("editor_text"),
        )


@dataclass
class Playback:
    key: str
    text: str
    audio: bytes
    started_at_ms: int
    state: str = "playing"  # playing | stopped
    _on_interrupt: Callable[[], bool] | None = None

    def interrupt(self) -> bool:
        """Stop this playback and return control to listening."""
        if self._on_interrupt is None:
            return False
        return self._on_interrupt()


class SessionRuntime:
    """Per-session live objects that do not persist."""

    def __init__(self, session: Session, engine: QaEngine, composer: Composer) -> None:
        self.session = session
        self.engine = engine
        self.composer = composer
        self.playback: Playback | None = None


class SessionManager:
    """Owns sessions, their persistence, and transcript routing."""

    def __init__(
        self,
        config: AppConfig | None = None,
        clock: Callable[[], int] | None = None,
        sessions_dir: str | Path | None = None,
    ) -> None:
        self.config = config or AppConfig()
        self.clock = clock or (lambda: int(time.monotonic() * 1000))
        self.sessions_dir = Path(sessions_dir or self.config.sessions_dir)
        self.registry: CommandRegistry = self.config.registry()
        self._runtimes: dict[str, SessionRuntime] = {}
        self._event_logs: dict[str, list[dict]] = {}
        self._subscribers: dict[str, list[Callable[[dict], None]]] = {}
        self._script_entries = self._load_script()
        self.memory = self._build_memory()
        self.tts_cache = TtsCache(
            synthesize=self._make_gateway().synthesize,
            voice_id=self.config.tts_voice,
            max_bytes=self.config.tts_cache_bytes,
        )

    # -- wiring -----------------------------------------------------------

    def _load_script(self):
        path = self.config.providers.mock_script_path
        if path and path != "-":
            return load_mock_script(path)
        return []

    def _make_gateway(self) -> Gateway:
        providers: ProviderConfig = self.config.providers
        if providers.mode("chat") == "mock":
            entries = [
                ScriptEntry(
                    capability=entry.capability,
                    response=entry.response,
                    match=entry.match,
                    times=entry.times,
                )
                for entry in self._script_entries
            ]
            return Gateway(config=providers, backend=MockBackend(entries))
        return Gateway(config=providers)

    def _build_memory(self) -> MemoryContext:
        if not self.config.memory_enabled:
            return MemoryContext(enabled=False)
        store = MemoryStore(path=self.config.memory_path, enabled=True)
        return store.snapshot()

    def _runtime_for(self, session: Session) -> SessionRuntime:
        gateway = self._make_gateway()
        engine = QaEngine(
            gateway,
            memory=self.memory,
            max_questions=self.config.max_questions,
            invalidation_policy=self.config.invalidation_policy,
            event_sink=lambda event: self._emit(session.id, event),
        )
        composer = Composer(
            gateway,
            memory=self.memory,
            config=ComposerConfig(max_passes=self.config.max_fact_check_passes),
        )
        return SessionRuntime(session, engine, composer)

    # -- events -------------------------------------------------------------

    def _emit(self, session_id: str, event: dict) -> None:
        self._event_logs.setdefault(session_id, []).append(event)
        path = self.sessions_dir / f"{session_id}.events.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event) + "\n")
        for subscriber in self._subscribers.get(session_id, []):
            subscriber(event)

    def subscribe(self, session_id: str, callback: Callable[[dict], None]) -> None:
        self._subscribers.setdefault(session_id, []).append(callback)

    def unsubscribe(self, session_id: str, callback: Callable[[dict], None]) -> None:
        try:
            self._subscribers.get(session_id, []).remove(callback)
        except ValueError:
            pass

    def event_log(self, session_id: str) -> list[dict]:
        return list(self._event_logs.get(session_id, []))

    def gateway_for(self, session_id: str) -> Gateway:
        return self._runtimes[session_id].engine.gateway

    def _status(self, session: Session, cue: str, message: str = "") -> None:
        self._emit(session.id, {"event": "status_cue", "cue": cue, "message": message})

    # -- persistence ----------------------------------------------------------

    def _path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def persist(self, session: Session) -> None:
        path = self._path(session.id)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(session.to_dict(), indent=2), encoding="utf-8")
        tmp.replace(path)

    # -- lifecycle ----------------------------------------------------------

    def create_session(self, task_kind: str, original_text: str | None = None) -> Session:
        session_id = str(uuid.uuid4())
        session = Session(
            id=session_id,
            graph=ConversationGraph(task_kind=task_kind, original_text=original_text),
            ledger=PhaseLedger(active_phase="drafting", active_phase_started_at=self.clock()),
            config_snapshot=self.config.snapshot(),
        )
        self._emit(session_id, {"event": "session_created", "id": session_id})
        runtime = self._runtime_for(session)
        self._runtimes[session_id] = runtime
        session.graph = runtime.engine.start_session(task_kind, original_text)
        first = session.graph.turns[0]
        self._emit(session_id, {"event": "question", "id": first.id, "text": first.question, "cursor": 0})
        self.persist(session)
        return session

    def get(self, session_id: str) -> Session:
        runtime = self._runtimes.get(session_id)
        if runtime is None:
            raise UnknownSessionError(f"unknown session {session_id}")
        return runtime.session

    def resume_session(self, session_id: str) -> Session:
        runtime = self._runtimes.get(session_id)
        if runtime is not None:
            return runtime.session
        path = self._path(session_id)
        if not path.exists():
            raise UnknownSessionError(f"unknown session {session_id}")
        session = Session.from_dict(json.loads(path.read_text(encoding="utf-8")))
        session.ledger.active_phase_started_at = self.clock()
        events_path = self.sessions_dir / f"{session_id}.events.jsonl"
        if session_id not in self._event_logs and events_path.exists():
            self._event_logs[session_id] = [
                json.loads(line)
                for line in events_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        self._runtimes[session_id] = self._runtime_for(session)
        return session

    # -- phases and input ------------------------------------------------------

    def set_phase(self, session: Session, new_phase: str) -> PhaseLedger:
        if new_phase not in PHASES:
            raise IllegalPhaseTransitionError(f"unknown phase {new_phase!r}")
        session.ledger.transition(new_phase, self.clock())
        if new_phase == "paused":
            session.input_enabled = False
        elif session.input_enabled is False and new_phase != "done":
            session.input_enabled = True
        self._emit(session.id, {"event": "phase_changed", "phase": new_phase})
        self.persist(session)
        return session.ledger

    def pause_input(self, session: Session) -> None:
        if session.phase == "paused":
            return
        self.set_phase(session, "paused")
        self._status(session, "paused", "Input paused")

    def resume_input(self, session: Session) -> None:
        if session.phase != "paused":
            return  # resume when not paused is a no-op
        self.set_phase(session, session.ledger.phase_before_pause)
        self._status(session, "resumed", "Input resumed")

    # -- playback ----------------------------------------------------------------

    def tts_playback(self, session: Session, text: str) -> Playback:
        if not text:
            raise ValueError("empty text")
        entry, was_hit = self.tts_cache.get_or_synthesize(text)
        playback = Playback(
            key=entry.key,
            text=text,
            audio=entry.audio,
            started_at_ms=self.clock(),
        )
        runtime = self._runtimes[session.id]
        runtime.playback = playback
        session.last_tts_key = entry.key
        session.last_tts_text = text
        self._emit(
            session.id,
            {"event": "playback_event", "state": "started", "key": entry.key, "cache_hit": was_hit},
        )
        self.persist(session)
        return playback

    def replay_last(self, session: Session) -> Playback:
        if not session.last_tts_text:
            raise NothingToReplayError("nothing to replay")
        return self.tts_playback(session, session.last_tts_text)

    def stop_playback(self, session: Session) -> bool:
        runtime = self._runtimes[session.id]
        playback = runtime.playback
        if playback is None or playback.state != "playing":
            return False
        playback.state = "stopped"
        self._emit(session.id, {"event": "playback_event", "state": "stopped", "key": playback.key})
        return True

    def notify_speech_start(self, session: Session, t_ms: int | None = None) -> bool:
        """Interrupt playback when speech starts inside the interruption window."""
        runtime = self._runtimes[session.id]
        playback = runtime.playback
        if playback is None or playback.state != "playing":
            return False
        now = t_ms if t_ms is not None else self.clock()
        window = self.config.interruption_window_ms
        if now - playback.started_at_ms <= window:
            return self.stop_playback(session)
        return False

    # -- composition ---------------------------------------------------------------

    def _compose(self, session: Session) -> FinalDraft:
        runtime = self._runtimes[session.id]
        self._status(session, "generating_final_output", "Generating final output")
        draft = runtime.composer.compose(session.graph)
        session.draft = draft
        session.editor_text = draft.text
        if session.phase == "drafting":
            self.set_phase(session, "revision")
        self._emit(
            session.id,
            {
                "event": "draft_ready",
                "text": draft.text,
                "tone": draft.tone.name,
                "passes_used": draft.passes_used,
            },
        )
        self.persist(session)
        return draft

    # -- transcript routing -----------------------------------------------------------

    def handle_transcript(self, session: Session, transcript: str) -> dict:
        """Route one transcript: commands first, then answers or editor input."""
        runtime = self._runtimes[session.id]
        match = recognize(transcript, self.registry)

        if not session.input_enabled:
            if match and match.command_id == "continue_writing":
                self.resume_input(session)
                return {"action": "resumed"}
            return {"action": "discarded_while_paused"}

        try:
            if match:
                return self._dispatch_command(session, runtime, match.command_id)
            return self._handle_plain_speech(session, runtime, transcript)
        except StepflowError as exc:
            self._emit(session.id, {"event": "error", "message": str(exc)})
            self.persist(session)
            return {"action": "error", "message": str(exc)}

    def _dispatch_command(self, session: Session, runtime: SessionRuntime, command_id: str) -> dict:
        engine = runtime.engine
        graph = session.graph
        if command_id == "skip_question":
            outcome = engine.skip_question(graph)
            self._status(session, "question_skipped", "Question skipped")
            return self._after_engine_outcome(session, outcome)
        if command_id == "next_question":
            try:
                cursor = engine.navigate(graph, direction="next")
            except BoundaryError:
                self._status(session, "boundary", "Already at the last question")
                return {"action": "boundary"}
            self._status(session, "moving_to_next_question", "Moving to next question")
            self.persist(session)
            return {"action": "cursor", "cursor": cursor}
        if command_id == "previous_question":
            try:
                cursor = engine.navigate(graph, direction="previous")
            except BoundaryError:
                self._status(session, "boundary", "Already at the first question")
                return {"action": "boundary"}
            self._status(session, "returning_to_previous", "Returning to previous question")
            self.persist(session)
            return {"action": "cursor", "cursor": cursor}
        if command_id == "modify_answer":
            session.pending_modify = True
            self._status(session, "awaiting_modified_answer", "Say the new answer")
            self.persist(session)
            return {"action": "awaiting_modified_answer"}
        if command_id == "pause_writing":
            self.pause_input(session)
            return {"action": "paused"}
        if command_id == "continue_writing":
            self.resume_input(session)
            return {"action": "resumed"}
        if command_id == "finish_writing":
            engine.finish(graph)
            draft = self._compose(session)
            return {"action": "draft_ready", "passes_used": draft.passes_used}
        if command_id == "go_to_editor":
            if session.draft is None:
                self._status(session, "no_draft_yet", "No draft yet")
                return {"action": "error", "message": "no draft yet"}
            if session.phase == "drafting":
                self.set_phase(session, "revision")
            return {"action": "editor"}
        if command_id == "return_to_questions":
            if session.phase == "revision":
                self.set_phase(session, "drafting")
            return {"action": "questions"}
        if command_id == "play_that_again":
            playback = self.replay_last(session)
            return {"action": "playback", "key": playback.key}
        if command_id == "stop_speaking":
            stopped = self.stop_playback(session)
            return {"action": "playback_stopped" if stopped else "no_playback"}
        raise ValueError(f"unhandled command {command_id!r}")

    def _handle_plain_speech(self, session: Session, runtime: SessionRuntime, transcript: str) -> dict:
        engine = runtime.engine
        graph = session.graph
        if session.pending_modify:
            session.pending_modify = False
            target = graph.turns[graph.cursor]
            if target.status == "pending":
                outcome = engine.submit_answer(graph, transcript)
                return self._after_engine_outcome(session, outcome)
            result = engine.modify_answer(graph, target.id, transcript)
            self._status(session, "answer_modified", "Answer updated")
            self.persist(session)
            outcome = result.outcome
            if outcome.kind == "generation_trigger":
                draft = self._compose(session)
                return {"action": "draft_ready", "passes_used": draft.passes_used}
            return {
                "action": "modified",
                "removed_ids": list(result.removed_ids),
                "kept_ids": list(result.kept_ids),
                "next_question": result.new_pending_question,
            }
        if session.phase == "drafting":
            if graph.active_turn() is None:
                raise NoActiveQuestionError("no active question")
            outcome = engine.submit_answer(graph, transcript)
            return self._after_engine_outcome(session, outcome)
        # revision phase: voice revision is out of scope; only commands act
        self._status(session, "editor_ignores_speech", "Use the keyboard to edit the draft")
        return {"action": "ignored"}

    def _after_engine_outcome(self, session: Session, outcome) -> dict:
        self.persist(session)
        if outcome.kind == "generation_trigger":
            draft = self._compose(session)
            return {"action": "draft_ready", "passes_used": draft.passes_used}
        self._emit(
            session.id,
            {
                "event": "question",
                "id": outcome.turn_id,
                "text": outcome.question,
                "cursor": session.graph.cursor,
            },
        )
        self.persist(session)
        return {"action": "question", "id": outcome.turn_id, "question": outcome.question}

    def save_editor_text(self, session: Session, text: str) -> None:
        session.editor_text = text
        self._emit(session.id, {"event": "editor_saved", "length": len(text)})
        self.persist(session)
