from __future__ import annotations

import random

import pytest

from stepflow.errors import NonMonotonicStreamError
from stepflow.segmentation import (
    Segmenter,
    SegmenterConfig,
    adapt_window,
    frame_energy,
    simulate_envelope,
)

SPEECH = 1.0
SILENCE = 0.0


def envelope(*runs: tuple[float, int], frame_ms: int = 20) -> list[tuple[int, float]]:
    """Build (t_ms, energy) frames from (energy, duration_ms) runs."""
    frames = []
    t = 0
    for energy, duration in runs:
        for _ in range(duration // frame_ms):
            frames.append((t, energy))
            t += frame_ms
    return frames


def kinds(events) -> list[str]:
    return [event.kind for event in events]


class TestFeedFrame:
    def test_speech_then_long_silence_completes(self):
        events = simulate_envelope(
            SegmenterConfig(thinking_window_ms=1500),
            envelope((SPEECH, 500), (SILENCE, 2000)),
        )
        assert kinds(events) == ["speech_start", "utterance_complete"]
        complete = events[-1]
        assert complete.start_ms == 0
        assert complete.end_ms == 500

    def test_thinking_pause_joins_speech_runs(self):
        events = simulate_envelope(
            SegmenterConfig(thinking_window_ms=1500),
            envelope((SPEECH, 500), (SILENCE, 800), (SPEECH, 500), (SILENCE, 2000)),
        )
        assert kinds(events) == ["speech_start", "utterance_complete"]
        complete = events[-1]
        assert complete.start_ms == 0
        assert complete.end_ms == 1800

    def test_short_burst_discarded_as_noise(self):
        events = simulate_envelope(
            SegmenterConfig(min_speech_ms=250),
            envelope((SPEECH, 100), (SILENCE, 2000)),
        )
        assert kinds(events) == ["discarded_noise"]

    def test_out_of_order_timestamp_rejected(self):
        segmenter = Segmenter(SegmenterConfig())
        segmenter.feed_energy(SPEECH, 100)
        with pytest.raises(NonMonotonicStreamError):
            segmenter.feed_energy(SPEECH, 100)

    def test_no_completion_without_start(self):
        events = simulate_envelope(SegmenterConfig(), envelope((SILENCE, 4000)))
        assert events == []

    def test_audio_ref_indexes_buffered_audio(self):
        segmenter = Segmenter(SegmenterConfig(min_speech_ms=40))
        collected = []
        t = 0
        for _ in range(5):
            collected += segmenter.feed_pcm([0.5] * 320, t)
            t += 20
        for _ in range(100):
            collected += segmenter.feed_pcm([0.0] * 320, t)
            t += 20
        complete = [e for e in collected if e.kind == "utterance_complete"]
        assert len(complete) == 1
        audio = segmenter.utterance_audio(complete[0].audio_ref)
        assert len(audio) == 5 * 320

    def test_replay_determinism(self):
        frames = envelope((SPEECH, 300), (SILENCE, 900), (SPEECH, 260), (SILENCE, 2000))
        first = simulate_envelope(SegmenterConfig(), frames)
        second = simulate_envelope(SegmenterConfig(), frames)
        assert first == second

    def test_flush_completes_pending_utterance(self):
        segmenter = Segmenter(SegmenterConfig())
        t = 0
        for _ in range(20):
            segmenter.feed_energy(SPEECH, t)
            t += 20
        events = segmenter.flush()
        assert kinds(events) == ["utterance_complete"]


class TestFrameEnergy:
    def test_rms(self):
        assert frame_energy([0.5, -0.5, 0.5, -0.5]) == pytest.approx(0.5)

    def test_empty(self):
        assert frame_energy([]) == 0.0


class TestAdaptWindow:
    def make(self):
        return Segmenter(SegmenterConfig(adaptive=True))

    def test_floor_clamp(self):
        # P95 of [400, 500, 600] is 600; 600 * 1.25 = 750 -> clamped to 800
        assert adapt_window(self.make(), [400, 500, 600]) == 800

    def test_empty_leaves_window_unchanged(self):
        segmenter = self.make()
        assert adapt_window(segmenter, []) == segmenter.config.thinking_window_ms

    def test_ceiling_clamp(self):
        # P95 of [3000, 3500, 3600] is 3600; 3600 * 1.25 = 4500 -> 4000
        assert adapt_window(self.make(), [3000, 3500, 3600]) == 4000

    def test_intra_utterance_pauses_observed(self):
        segmenter = Segmenter(SegmenterConfig(adaptive=True))
        for t, energy in envelope(
            (SPEECH, 300), (SILENCE, 800), (SPEECH, 300), (SILENCE, 2000)
        ):
            segmenter.feed_energy(energy, t)
        assert segmenter.completed_pauses == [800]

    def test_non_adaptive_rejected(self):
        with pytest.raises(ValueError):
            adapt_window(Segmenter(SegmenterConfig(adaptive=False)), [100])


class TestProperties:
    def random_envelope(self, rng: random.Random) -> list[tuple[int, float]]:
        runs = []
        for _ in range(rng.randint(1, 12)):
            energy = SPEECH if rng.random() < 0.5 else SILENCE
            runs.append((energy, 20 * rng.randint(1, 60)))
        return envelope(*runs)

    def test_window_monotonicity_over_random_envelopes(self):
        rng = random.Random(20250810)
        for _ in range(200):
            frames = self.random_envelope(rng)
            small, large = sorted(rng.sample(range(100, 4001, 100), 2))
            completes_small = kinds(
                simulate_envelope(SegmenterConfig(thinking_window_ms=small), frames)
            ).count("utterance_complete")
            completes_large = kinds(
                simulate_envelope(SegmenterConfig(thinking_window_ms=large), frames)
            ).count("utterance_complete")
            assert completes_large <= completes_small

    def test_no_complete_without_start_and_ordering(self):
        rng = random.Random(42)
        for _ in range(100):
            frames = self.random_envelope(rng)
            events = simulate_envelope(SegmenterConfig(), frames)
            starts = 0
            completes = 0
            last_end = -1
            for event in events:
                if event.kind == "speech_start":
                    starts += 1
                elif event.kind == "utterance_complete":
                    completes += 1
                    assert completes <= starts
                    assert event.start_ms > last_end
                    last_end = event.end_ms
                    assert event.end_ms - event.start_ms >= 250


class TestEnvelopeFixtureFormat:
    def test_jsonl_envelope_round_trip(self, tmp_path):
        import json

        from stepflow.segmentation import load_envelope_jsonl

        frames = envelope((SPEECH, 500), (SILENCE, 2000))
        path = tmp_path / "fixture.jsonl"
        path.write_text(
            "\n".join(json.dumps({"t_ms": t, "energy": e}) for t, e in frames)
        )
        loaded = load_envelope_jsonl(path)
        assert loaded == frames
        events = simulate_envelope(SegmenterConfig(), loaded)
        assert kinds(events) == ["speech_start", "utterance_complete"]

    def test_feed_envelope_line(self):
        segmenter = Segmenter(SegmenterConfig())
        assert segmenter.feed_envelope_line('{"t_ms": 0, "energy": 1.0}') == []
        assert segmenter.last_timestamp_ms == 0


def test_pluggable_vad_overrides_energy_threshold():
    # a detector that only trusts very loud frames
    strict = lambda energy, cfg: energy > 0.9
    frames = envelope((0.5, 500), (SILENCE, 2000))
    default_events = simulate_envelope(SegmenterConfig(), frames)
    assert kinds(default_events) == ["speech_start", "utterance_complete"]
    segmenter = Segmenter(SegmenterConfig(), vad=strict)
    events = []
    for t, e in frames:
        events.extend(segmenter.feed_energy(e, t))
    assert events == []
