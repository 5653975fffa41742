"""Headless end-to-end runs from a JSONL action script.

Each line is one action:
    {"action": "config", "config": {...}}            optional, first line only
    {"action": "create", "task_kind": "write", "original_text": "..."}
    {"action": "transcript", "text": "please skip this question"}
    {"action": "tts", "text": "..."}
    {"action": "speech_start", "t_ms": 1234}
    {"action": "editor", "text": "..."}
    {"action": "set_phase", "phase": "revision"}

Writes session.json, events.jsonl, and draft_pair.jsonl (the first generated
draft vs the fact-check-corrected final draft) into the output directory; the
draft pair is directly scoreable by stepflow-eval.
"""

from __future__ import annotations

import json
from pathlib import Path

from .config import AppConfig
from .session import SessionManager


class StepClock:
    """Deterministic clock: each reading advances by a fixed step."""

    def __init__(self, step_ms: int = 1000) -> None:
        self.now = 0
        self.step_ms = step_ms

    def __call__(self) -> int:
        self.now += self.step_ms
        return self.now


def run_replay(
    script_path: str | Path,
    out_dir: str | Path,
    config: AppConfig | None = None,
) -> dict:
    script_path = Path(script_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    actions = [
        json.loads(line)
        for line in script_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if actions and actions[0].get("action") == "config":
        config_doc = dict(actions[0]["config"])
        mock = config_doc.get("providers", {}).get("mock_script_path")
        if mock and mock != "-" and not Path(mock).is_absolute():
            config_doc.setdefault("providers", {})["mock_script_path"] = str(
                script_path.parent / mock
            )
        config = AppConfig.from_dict(config_doc)
        actions = actions[1:]
    config = config or AppConfig()

    manager = SessionManager(
        config=config, clock=StepClock(), sessions_dir=out_dir / "sessions"
    )
    session = None
    effects = []
    for action in actions:
        kind = action["action"]
        if kind == "create":
            session = manager.create_session(
                action["task_kind"], action.get("original_text")
            )
        elif session is None:
            raise ValueError("script must create a session before other actions")
        elif kind == "transcript":
            effects.append(manager.handle_transcript(session, action["text"]))
        elif kind == "tts":
            manager.tts_playback(session, action["text"])
        elif kind == "speech_start":
            manager.notify_speech_start(session, action.get("t_ms"))
        elif kind == "editor":
            manager.save_editor_text(session, action["text"])
        elif kind == "set_phase":
            manager.set_phase(session, action["phase"])
        else:
            raise ValueError(f"unknown replay action {kind!r}")

    if session is None:
        raise ValueError("script created no session")

    (out_dir / "session.json").write_text(
        json.dumps(session.to_dict(), indent=2), encoding="utf-8"
    )
    with open(out_dir / "events.jsonl", "w", encoding="utf-8") as handle:
        for event in manager.event_log(session.id):
            handle.write(json.dumps(event) + "\n")

    summary = {
        "session_id": session.id,
        "phase": session.phase,
        "turns": len(session.graph.turns),
        "answered": session.graph.answered_count(),
        "skipped": sum(1 for t in session.graph.turns if t.status == "skipped"),
        "finished": session.graph.finished,
        "draft": None,
        "effects": len(effects),
    }
    if session.draft is not None:
        summary["draft"] = {
            "tone": session.draft.tone.name,
            "passes_used": session.draft.passes_used,
            "sha256_prefix": session.draft.provenance[-1].draft_sha256[:12],
        }
        pair = {
            "original": session.draft.first_draft,
            "revised": session.draft.text,
            "task": session.graph.task_kind,
            "tool_tag": "stepflow",
        }
        with open(out_dir / "draft_pair.jsonl", "w", encoding="utf-8") as handle:
            handle.write(json.dumps(pair) + "\n")
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    return summary
