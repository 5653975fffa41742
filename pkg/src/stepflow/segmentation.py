"""Utterance boundary detection over a stream of audio frames.

A pure state machine: energy-threshold voice activity detection (pluggable,
so segmentation logic stays testable offline), a noise floor per profile, and
a thinking window that treats short post-speech silence as mid-utterance
thinking rather than completion. Sub-minimum speech bursts are discarded as
noise.

Frames are either raw 16 kHz mono PCM sample blocks or precomputed energy
envelopes (the JSONL fixture format: {"t_ms": int, "energy": float}).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import NonMonotonicStreamError

NOISE_FLOORS = {"quiet": 0.01, "ambient": 0.05}
SPEECH_MARGIN = 0.1  # energy above the floor required at sensitivity 0

WINDOW_FLOOR_MS = 800
WINDOW_CEIL_MS = 4000
WINDOW_PAUSE_FACTOR = 1.25


@dataclass(frozen=True)
class SegmenterConfig:
    thinking_window_ms: int = 1500
    min_speech_ms: int = 250
    vad_sensitivity: float = 0.5
    noise_profile: str = "quiet"  # quiet | ambient | custom
    custom_noise_floor: float = 0.0
    adaptive: bool = False
    frame_ms: int = 20

    def __post_init__(self) -> None:
        if self.thinking_window_ms < self.frame_ms:
            raise ValueError("thinking window smaller than one frame")
        if not 0.0 <= self.vad_sensitivity <= 1.0:
            raise ValueError("vad_sensitivity outside [0, 1]")
        if self.noise_profile not in (*NOISE_FLOORS, "custom"):
            raise ValueError(f"unknown noise profile {self.noise_profile!r}")

    @property
    def noise_floor(self) -> float:
        if self.noise_profile == "custom":
            return self.custom_noise_floor
        return NOISE_FLOORS[self.noise_profile]

    @property
    def speech_threshold(self) -> float:
        return self.noise_floor + (1.0 - self.vad_sensitivity) * SPEECH_MARGIN


@dataclass(frozen=True)
class FrameVerdict:
    is_speech: bool
    energy: float
    timestamp_ms: int


@dataclass(frozen=True)
class UtteranceEvent:
    kind: str  # speech_start | utterance_complete | discarded_noise
    start_ms: int
    end_ms: int
    audio_ref: int | None = None  # index into the segmenter's utterance buffers


def frame_energy(samples: Sequence[float]) -> float:
    """RMS of one PCM sample block (floats in [-1, 1])."""
    if not samples:
        return 0.0
    return math.sqrt(sum(s * s for s in samples) / len(samples))


class Segmenter:
    """Single-stream segmenter; frames must arrive in timestamp order.

    The voice-activity decision is pluggable (an ML detector can be dropped
    in); the default is an energy threshold over the configured noise floor
    so segmentation stays testable offline.
    """

    def __init__(
        self,
        config: SegmenterConfig | None = None,
        vad: Callable[[float, "SegmenterConfig"], bool] | None = None,
    ) -> None:
        self.config = config or SegmenterConfig()
        self.vad = vad or (lambda energy, cfg: energy >= cfg.speech_threshold)
        self.thinking_window_ms = self.config.thinking_window_ms
        self._last_ts: int | None = None
        self._state = "idle"  # idle | tentative | speech | pause
        self._run_start = 0  # start of the current speech/tentative run
        self._utterance_start = 0
        self._last_speech_end = 0
        self._pause_start = 0
        self._intra_pauses: list[int] = []
        self._buffers: list[list[float]] = []
        self._current_audio: list[float] = []
        self.completed_pauses: list[int] = []  # observed intra-utterance pauses

    # -- frame ingestion ------------------------------------------------

    def feed_pcm(self, samples: Sequence[float], timestamp_ms: int) -> list[UtteranceEvent]:
        return self.feed_energy(frame_energy(samples), timestamp_ms, samples)

    def feed_energy(
        self,
        energy: float,
        timestamp_ms: int,
        samples: Sequence[float] | None = None,
    ) -> list[UtteranceEvent]:
        if self._last_ts is not None and timestamp_ms <= self._last_ts:
            raise NonMonotonicStreamError(
                f"non-monotonic stream: {timestamp_ms} after {self._last_ts}"
            )
        self._last_ts = timestamp_ms
        verdict = FrameVerdict(
            is_speech=self.vad(energy, self.config),
            energy=energy,
            timestamp_ms=timestamp_ms,
        )
        return self._advance(verdict, samples)

    def feed_envelope_line(self, line: str) -> list[UtteranceEvent]:
        record = json.loads(line)
        return self.feed_energy(record["energy"], record["t_ms"])

    @property
    def last_timestamp_ms(self) -> int | None:
        return self._last_ts

    def utterance_audio(self, audio_ref: int) -> list[float]:
        return self._buffers[audio_ref]

    # -- state machine ---------------------------------------------------

    def _advance(
        self, verdict: FrameVerdict, samples: Sequence[float] | None
    ) -> list[UtteranceEvent]:
        events: list[UtteranceEvent] = []
        ts = verdict.timestamp_ms
        frame_end = ts + self.config.frame_ms

        if verdict.is_speech:
            if samples is not None:
                self._current_audio.extend(samples)
            if self._state == "idle":
                self._state = "tentative"
                self._run_start = ts
            elif self._state == "pause":
                self._intra_pauses.append(ts - self._pause_start)
                self._state = "speech"
            if self._state == "tentative":
                if frame_end - self._run_start >= self.config.min_speech_ms:
                    self._state = "speech"
                    self._utterance_start = self._run_start
                    events.append(
                        UtteranceEvent("speech_start", self._run_start, frame_end)
                    )
            self._last_speech_end = frame_end
        else:
            if self._state == "tentative":
                events.append(
                    UtteranceEvent("discarded_noise", self._run_start, self._last_speech_end)
                )
                self._current_audio = []
                self._state = "idle"
            elif self._state == "speech":
                self._state = "pause"
                self._pause_start = self._last_speech_end
            if self._state == "pause":
                if frame_end - self._last_speech_end >= self.thinking_window_ms:
                    events.append(self._complete_utterance())
        return events

    def _complete_utterance(self) -> UtteranceEvent:
        self._buffers.append(self._current_audio)
        self._current_audio = []
        self.completed_pauses.extend(self._intra_pauses)
        self._intra_pauses = []
        self._state = "idle"
        return UtteranceEvent(
            "utterance_complete",
            self._utterance_start,
            self._last_speech_end,
            audio_ref=len(self._buffers) - 1,
        )

    def flush(self) -> list[UtteranceEvent]:
        """Force-complete a pending utterance at end of stream (WS close)."""
        if self._state in ("speech", "pause"):
            return [self._complete_utterance()]
        if self._state == "tentative":
            self._state = "idle"
            self._current_audio = []
            return [
                UtteranceEvent("discarded_noise", self._run_start, self._last_speech_end)
            ]
        return []


def percentile_95(values: Sequence[int]) -> int:
    """Nearest-rank 95th percentile."""
    ordered = sorted(values)
    rank = math.ceil(0.95 * len(ordered))
    return ordered[rank - 1]


def adapt_window(segmenter: Segmenter, pauses: Sequence[int] | None = None) -> int:
    """Recompute the thinking window from observed intra-utterance pauses.

    new window = clamp(P95(pauses) * 1.25, 800 ms, 4000 ms); an empty
    observation list leaves the window unchanged.
    """
    if not segmenter.config.adaptive:
        raise ValueError("segmenter is not adaptive")
    observed = list(pauses) if pauses is not None else segmenter.completed_pauses
    if not observed:
        return segmenter.thinking_window_ms
    proposal = percentile_95(observed) * WINDOW_PAUSE_FACTOR
    clamped = int(min(max(proposal, WINDOW_FLOOR_MS), WINDOW_CEIL_MS))
    segmenter.thinking_window_ms = clamped
    return clamped


def simulate_envelope(
    config: SegmenterConfig, envelope: Iterable[tuple[int, float]]
) -> list[UtteranceEvent]:
    """Run a fresh segmenter over (t_ms, energy) pairs; no flush at the end."""
    segmenter = Segmenter(config)
    events: list[UtteranceEvent] = []
    for t_ms, energy in envelope:
        events.extend(segmenter.feed_energy(energy, t_ms))
    return events


def load_envelope_jsonl(path: str | Path) -> list[tuple[int, float]]:
    pairs = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            record = json.loads(line)
            pairs.append((record["t_ms"], record["energy"]))
    return pairs
