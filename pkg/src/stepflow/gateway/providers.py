"""Uniform access to chat, transcription, speech synthesis, and embedding.

Each capability runs against either a live HTTP provider or a scripted mock.
Mocks are pure functions of (script, per-capability call index), which makes
full pipeline runs reproducible; script entries match on the call index or on
a prompt substring, first non-expired entry in file order wins.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import (
    EmptySegmentError,
    MalformedModelOutputError,
    ProviderUnavailableError,
)
from .parsing import ReplyParseError, StructuredReply, parse_reply

CAPABILITIES = ("chat", "transcribe", "synthesize", "embed")

MOCK_EMBED_DIM = 64
MOCK_SAMPLE_RATE = 16_000
MOCK_SAMPLES_PER_CHAR = 160  # 10 ms of audio per character

REPROMPT_SUFFIX = "\n\nReturn only valid JSON matching the requested schema."


@dataclass(frozen=True)
class ProviderConfig:
    """Endpoints and models per capability, or a mock script path."""

    chat_endpoint: str = ""
    chat_model: str = "4.1-mini"
    transcribe_endpoint: str = ""
    transcribe_model: str = "whisper-1"
    synthesize_endpoint: str = ""
    synthesize_model: str = "tts-1"
    synthesize_voice: str = "alloy"
    embed_endpoint: str = ""
    embed_model: str = "gte-Qwen1.5-7B-instruct"
    api_key: str = ""
    timeout_ms: int = 30_000
    retry_count: int = 2
    mock_script_path: str | None = None

    def mode(self, capability: str) -> str:
        return "mock" if self.mock_script_path else "live"

    def __post_init__(self) -> None:
        if not self.mock_script_path:
            missing = [
                capability
                for capability in CAPABILITIES
                if not getattr(self, f"{capability}_endpoint")
            ]
            if missing:
                raise ValueError("live mode needs endpoints for: " + ", ".join(missing))

    def with_env_overrides(self) -> "ProviderConfig":
        """Apply STEPFLOW_API_KEY / STEPFLOW_<CAPABILITY>_ENDPOINT overrides."""
        import dataclasses
        import os

        overrides: dict[str, str] = {}
        if os.environ.get("STEPFLOW_API_KEY"):
            overrides["api_key"] = os.environ["STEPFLOW_API_KEY"]
        for capability in CAPABILITIES:
            value = os.environ.get(f"STEPFLOW_{capability.upper()}_ENDPOINT")
            if value:
                overrides[f"{capability}_endpoint"] = value
        return dataclasses.replace(self, **overrides) if overrides else self


@dataclass
class ScriptEntry:
    capability: str
    response: str
    match: int | str | None = None
    times: int | None = None
    uses: int = 0

    def matches(self, call_index: int, prompt: str) -> bool:
        if self.times is not None and self.uses >= self.times:
            return False
        if self.match is None:
            return True
        if isinstance(self.match, int):
            return self.match == call_index
        return self.match in prompt


def load_mock_script(path: str | Path) -> list[ScriptEntry]:
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        entries.append(
            ScriptEntry(
                capability=record["capability"],
                response=record["response"],
                match=record.get("match"),
                times=record.get("times"),
            )
        )
    return entries


class MockBackend:
    """Replays scripted responses; one call counter per capability."""

    def __init__(self, entries: list[ScriptEntry]) -> None:
        self.entries = entries
        self.counters = {capability: 0 for capability in CAPABILITIES}
        self._lock = threading.Lock()

    def _next(self, capability: str, prompt: str) -> str:
        with self._lock:
            index = self.counters[capability]
            self.counters[capability] += 1
            for entry in self.entries:
                if entry.capability == capability and entry.matches(index, prompt):
                    entry.uses += 1
                    return entry.response
        raise ProviderUnavailableError(
            f"mock script has no {capability} entry for call {index}"
        )

    def chat(self, prompt: str) -> str:
        return self._next("chat", prompt)

    def transcribe(self, audio: bytes) -> str:
        return self._next("transcribe", "")

    def synthesize(self, text: str) -> bytes:
        return mock_synthesize(text)

    def embed(self, text: str) -> list[float]:
        return mock_embed(text)


class LiveBackend:
    """Thin OpenAI-style HTTP client with retries and backoff."""

    def __init__(self, config: ProviderConfig) -> None:
        self.config = config

    def _post(self, url: str, payload: dict, files=None) -> dict:
        import httpx

        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        delay = 0.5
        last_error: Exception | None = None
        for _ in range(self.config.retry_count + 1):
            try:
                response = httpx.post(
                    url,
                    json=None if files else payload,
                    data=payload if files else None,
                    files=files,
                    headers=headers,
                    timeout=self.config.timeout_ms / 1000,
                )
                response.raise_for_status()
                return response.json()
            except Exception as exc:  # httpx transport or HTTP status failure
                last_error = exc
                time.sleep(delay)
                delay *= 2
        raise ProviderUnavailableError(f"provider unavailable: {last_error}")

    def chat(self, prompt: str) -> str:
        data = self._post(
            self.config.chat_endpoint,
            {
                "model": self.config.chat_model,
                "messages": [{"role": "user", "content": prompt}],
            },
        )
        return data["choices"][0]["message"]["content"]

    def transcribe(self, audio: bytes) -> str:
        data = self._post(
            self.config.transcribe_endpoint,
            {"model": self.config.transcribe_model},
            files={"file": ("audio.wav", audio, "audio/wav")},
        )
        return data["text"]

    def synthesize(self, text: str) -> bytes:
        import httpx

        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        response = httpx.post(
            self.config.synthesize_endpoint,
            json={
                "model": self.config.synthesize_model,
                "voice": self.config.synthesize_voice,
                "input": text,
            },
            headers=headers,
            timeout=self.config.timeout_ms / 1000,
        )
        response.raise_for_status()
        return response.content

    def embed(self, text: str) -> list[float]:
        data = self._post(
            self.config.embed_endpoint,
            {"model": self.config.embed_model, "input": text},
        )
        return data["data"][0]["embedding"]


def mock_embed(text: str) -> list[float]:
    """Deterministic hashed bag-of-words embedding, dimension 64."""
    if not text:
        raise ValueError("empty text")
    vector = [0.0] * MOCK_EMBED_DIM
    for token in text.lower().split():
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        vector[int.from_bytes(digest[:4], "big") % MOCK_EMBED_DIM] += 1.0
    return vector


def mock_embed_bucket(token: str) -> int:
    digest = hashlib.sha256(token.lower().encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % MOCK_EMBED_DIM


def mock_synthesize(text: str) -> bytes:
    """A 440 Hz int16 tone whose length is proportional to the text length."""
    if not text:
        raise ValueError("empty text")
    n_samples = MOCK_SAMPLES_PER_CHAR * len(text)
    step = 2 * math.pi * 440.0 / MOCK_SAMPLE_RATE
    samples = bytearray()
    for i in range(n_samples):
        value = int(12_000 * math.sin(step * i))
        samples += value.to_bytes(2, "little", signed=True)
    return bytes(samples)


@dataclass
class Gateway:
    """Facade the engine talks to; stateless apart from config and mocks."""

    config: ProviderConfig = field(default_factory=lambda: ProviderConfig(mock_script_path="-"))
    backend: object | None = None

    def __post_init__(self) -> None:
        if self.backend is None:
            if self.config.mock_script_path:
                entries = (
                    []
                    if self.config.mock_script_path == "-"
                    else load_mock_script(self.config.mock_script_path)
                )
                self.backend = MockBackend(entries)
            else:
                self.backend = LiveBackend(self.config)

    @classmethod
    def from_script(cls, entries: list[ScriptEntry]) -> "Gateway":
        gateway = cls()
        gateway.backend = MockBackend(entries)
        return gateway

    def chat_structured(self, prompt: str, expected_schema: str) -> StructuredReply:
        raw = self.backend.chat(prompt)
        try:
            return parse_reply(raw, expected_schema)
        except ReplyParseError:
            pass
        raw2 = self.backend.chat(prompt + REPROMPT_SUFFIX)
        try:
            return parse_reply(raw2, expected_schema)
        except ReplyParseError as exc:
            raise MalformedModelOutputError(
                f"malformed model output: {exc}", raw_text=raw2
            ) from exc

    def transcribe(self, audio: bytes) -> str:
        if not audio:
            raise EmptySegmentError("empty segment")
        return self.backend.transcribe(audio)

    def synthesize(self, text: str) -> bytes:
        if not text:
            raise ValueError("empty text")
        return self.backend.synthesize(text)

    def embed(self, text: str) -> list[float]:
        if not text:
            raise ValueError("empty text")
        return self.backend.embed(text)
