"""Service configuration document."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..commands import DEFAULT_THRESHOLD, CommandRegistry
from ..gateway.providers import ProviderConfig


@dataclass(frozen=True)
class AppConfig:
    similarity_threshold: float = DEFAULT_THRESHOLD
    max_fact_check_passes: int = 10
    thinking_window_ms: int = 1500
    interruption_window_ms: int = 6000
    max_questions: int = 25
    memory_enabled: bool = False
    invalidation_policy: str = "truncate_all"
    providers: ProviderConfig = field(
        default_factory=lambda: ProviderConfig(mock_script_path="-")
    )
    commands: dict = field(default_factory=dict)  # registry overrides
    sessions_dir: str = "sessions"
    memory_path: str | None = None
    tts_voice: str = "alloy"
    tts_cache_bytes: int = 16 * 1024 * 1024

    def registry(self) -> CommandRegistry:
        document = {
            "threshold": self.similarity_threshold,
            "commands": self.commands,
        }
        return CommandRegistry.from_document(document)

    def snapshot(self) -> dict:
        return {
            "similarity_threshold": self.similarity_threshold,
            "max_fact_check_passes": self.max_fact_check_passes,
            "thinking_window_ms": self.thinking_window_ms,
            "interruption_window_ms": self.interruption_window_ms,
            "max_questions": self.max_questions,
            "memory_enabled": self.memory_enabled,
            "invalidation_policy": self.invalidation_policy,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AppConfig":
        providers = doc.get("providers", {})
        provider_config = (
            ProviderConfig(**providers) if providers else ProviderConfig(mock_script_path="-")
        ).with_env_overrides()
        return cls(
            similarity_threshold=doc.get("similarity_threshold", DEFAULT_THRESHOLD),
            max_fact_check_passes=doc.get("max_fact_check_passes", 10),
            thinking_window_ms=doc.get("thinking_window_ms", 1500),
            interruption_window_ms=doc.get("interruption_window_ms", 6000),
            max_questions=doc.get("max_questions", 25),
            memory_enabled=doc.get("memory_enabled", False),
            invalidation_policy=doc.get("invalidation_policy", "truncate_all"),
            providers=provider_config,
            commands=doc.get("commands", {}),
            sessions_dir=doc.get("sessions_dir", "sessions"),
            memory_path=doc.get("memory_path"),
            tts_voice=doc.get("tts_voice", "alloy"),
            tts_cache_bytes=doc.get("tts_cache_bytes", 16 * 1024 * 1024),
        )

    @classmethod
    def load(cls, path: str | Path) -> "AppConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
