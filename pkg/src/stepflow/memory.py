"""Optional persistent user-fact store.

Flat key/value facts injected into question generation, draft generation,
and fact checking. One JSON file per user; upserts win by recency. With the
store disabled, rendered prompts stay byte-identical to a memory-free build.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .gateway.templates import render

FACT_SOURCES = ("user_declared", "session_learned")


@dataclass(frozen=True)
class MemoryFact:
    key: str
    value: str
    source: str = "user_declared"
    created_at: str = ""

    def __post_init__(self) -> None:
        if not self.key:
            raise ValueError("empty fact key")
        if not self.value:
            raise ValueError("empty fact value")
        if self.source not in FACT_SOURCES:
            raise ValueError(f"unknown fact source {self.source!r}")


@dataclass(frozen=True)
class MemoryContext:
    enabled: bool = False
    facts: tuple[MemoryFact, ...] = ()

    def as_object(self) -> dict[str, str]:
        return {fact.key: fact.value for fact in self.facts}


def render_memory_block(context: MemoryContext, purpose: str = "prompting") -> str:
    """The E-style memory block for a prompt, or "" when disabled/empty."""
    if purpose not in ("prompting", "fact_checking"):
        raise ValueError(f"unknown purpose {purpose!r}")
    if not context.enabled or not context.facts:
        return ""
    template = "memory_context" if purpose == "prompting" else "memory_fact_check"
    return render(template, {"memories": context.as_object()})


class MemoryStore:
    """Single-writer fact store persisted as one JSON file per user."""

    def __init__(self, path: str | Path | None = None, enabled: bool = True) -> None:
        self.path = Path(path) if path else None
        self.enabled = enabled
        self._facts: dict[str, MemoryFact] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            self._load()

    def put_fact(self, key: str, value: str, source: str = "user_declared") -> MemoryFact:
        fact = MemoryFact(
            key=key,
            value=value,
            source=source,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        with self._lock:
            self._facts[key] = fact
            self._save()
        return fact

    def get_fact(self, key: str) -> MemoryFact | None:
        return self._facts.get(key)

    def snapshot(self) -> MemoryContext:
        with self._lock:
            return MemoryContext(enabled=self.enabled, facts=tuple(self._facts.values()))

    def _save(self) -> None:
        if not self.path:
            return
        document = {
            "enabled": self.enabled,
            "facts": [
                {
                    "key": fact.key,
                    "value": fact.value,
                    "source": fact.source,
                    "created_at": fact.created_at,
                }
                for fact in self._facts.values()
            ],
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(document, indent=2), encoding="utf-8")
        tmp.replace(self.path)

    def _load(self) -> None:
        document = json.loads(self.path.read_text(encoding="utf-8"))
        self.enabled = document.get("enabled", True)
        for item in document.get("facts", []):
            fact = MemoryFact(
                key=item["key"],
                value=item["value"],
                source=item.get("source", "user_declared"),
                created_at=item.get("created_at", ""),
            )
            self._facts[fact.key] = fact
