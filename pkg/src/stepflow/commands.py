"""Client-side voice macro detection.

Transcripts are checked for commands before any other processing: exact
containment of a registry phrase wins outright, otherwise a sliding window of
roughly the phrase's length is scored with token-level trigram cosine
similarity against every registered phrase. Ordinary answers fall through and
return no match.

Trigram vectors are the multiset union of character trigrams of each token,
padded with one space per side (" skip " -> " sk", "ski", "kip", "ip "), which
keeps the score high when filler words are inserted between command tokens.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyPhraseError, RegistryError

DEFAULT_THRESHOLD = 0.85

# Built-in command set; every phrase is at least two tokens to avoid
# accidental triggers from single common words.
DEFAULT_PHRASES: dict[str, tuple[str, ...]] = {
    "skip_question": ("skip question",),
    "next_question": ("next question",),
    "previous_question": ("previous question",),
    "modify_answer": ("modify answer",),
    "pause_writing": ("pause writing",),
    "continue_writing": ("continue writing",),
    "finish_writing": ("finish writing",),
    "go_to_editor": ("go to editor",),
    "return_to_questions": ("return to questions",),
    "play_that_again": ("play that again",),
    "stop_speaking": ("stop speaking",),
}

BUILTIN_COMMANDS: tuple[str, ...] = tuple(DEFAULT_PHRASES)

_APOSTROPHES = re.compile(r"[’']")
_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def normalize(text: str) -> list[str]:
    """Lowercase, strip punctuation, and split into tokens.

    Apostrophes are deleted rather than treated as separators ("that's" ->
    "thats") because STT output is inconsistent about them.
    """
    lowered = _APOSTROPHES.sub("", text.lower())
    return [tok for tok in _NON_ALNUM.split(lowered) if tok]


def trigram_vector(tokens: list[str]) -> Counter[str]:
    """Character-trigram counts of each space-padded token, summed."""
    grams: Counter[str] = Counter()
    for token in tokens:
        padded = f" {token} "
        for i in range(len(padded) - 2):
            grams[padded[i : i + 3]] += 1
    return grams


def similarity(phrase_a: list[str], phrase_b: list[str]) -> float:
    """Cosine similarity of the trigram vectors of two token lists."""
    if not phrase_a or not phrase_b:
        raise EmptyPhraseError("empty phrase")
    vec_a = trigram_vector(phrase_a)
    vec_b = trigram_vector(phrase_b)
    dot = sum(count * vec_b.get(gram, 0) for gram, count in vec_a.items())
    norm_sq_a = sum(count * count for count in vec_a.values())
    norm_sq_b = sum(count * count for count in vec_b.values())
    if norm_sq_a == 0 or norm_sq_b == 0:
        return 0.0
    return dot / math.sqrt(norm_sq_a * norm_sq_b)


@dataclass(frozen=True)
class CommandMatch:
    """One recognized command occurrence inside a transcript."""

    command_id: str
    matched_span: tuple[int, int]  # half-open token index range
    score: float
    phrase: str


@dataclass(frozen=True)
class CommandRegistry:
    """Immutable phrase table; recognize() is a pure function over it."""

    phrases: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_PHRASES)
    )
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise RegistryError(f"threshold {self.threshold} outside [0, 1]")
        seen: dict[str, str] = {}
        normalized: dict[str, tuple[str, ...]] = {}
        for command_id, phrase_list in self.phrases.items():
            if command_id not in BUILTIN_COMMANDS:
                raise RegistryError(f"unknown command id {command_id!r}")
            cleaned: list[str] = []
            for phrase in phrase_list:
                tokens = normalize(phrase)
                if not tokens:
                    raise RegistryError(f"phrase {phrase!r} normalizes to nothing")
                norm = " ".join(tokens)
                owner = seen.get(norm)
                if owner is not None and owner != command_id:
                    raise RegistryError(
                        f"phrase {norm!r} bound to both {owner} and {command_id}"
                    )
                seen[norm] = command_id
                if norm not in cleaned:
                    cleaned.append(norm)
            normalized[command_id] = tuple(cleaned)
        object.__setattr__(self, "phrases", normalized)

    def to_document(self) -> dict:
        return {
            "threshold": self.threshold,
            "commands": {cmd: list(ph) for cmd, ph in self.phrases.items()},
        }

    @classmethod
    def from_document(cls, doc: dict) -> "CommandRegistry":
        commands = doc.get("commands", {})
        phrases = dict(DEFAULT_PHRASES)
        for command_id, phrase_list in commands.items():
            phrases[command_id] = tuple(phrase_list)
        return cls(phrases=phrases, threshold=doc.get("threshold", DEFAULT_THRESHOLD))

    @classmethod
    def load(cls, path: str | Path) -> "CommandRegistry":
        return cls.from_document(json.loads(Path(path).read_text()))


def register_macro(
    registry: CommandRegistry, command_id: str, phrase: str
) -> CommandRegistry:
    """Return a new registry with `phrase` bound to `command_id`.

    Re-registering the same phrase on the same command is an idempotent
    success; binding it to a different command is rejected.
    """
    if command_id not in registry.phrases:
        raise RegistryError(f"unknown command id {command_id!r}")
    tokens = normalize(phrase)
    if not tokens:
        raise RegistryError(f"phrase {phrase!r} normalizes to nothing")
    norm = " ".join(tokens)
    for owner, phrase_list in registry.phrases.items():
        if norm in phrase_list:
            if owner == command_id:
                return registry
            raise RegistryError(f"phrase already bound to {owner}")
    phrases = {cmd: ph for cmd, ph in registry.phrases.items()}
    phrases[command_id] = phrases[command_id] + (norm,)
    return CommandRegistry(phrases=phrases, threshold=registry.threshold)


def _find_subsequence(haystack: list[str], needle: list[str]) -> int | None:
    """Index of the first contiguous occurrence of needle, or None."""
    n = len(needle)
    for start in range(len(haystack) - n + 1):
        if haystack[start : start + n] == needle:
            return start
    return None


def recognize(transcript: str, registry: CommandRegistry) -> CommandMatch | None:
    """Detect a command in a transcript, or return None for ordinary answers.

    Exact containment of a phrase as a contiguous token subsequence wins with
    score 1.0. Otherwise windows of the phrase's token length +/-1 are scored
    with trigram cosine similarity and the best window must clear the
    registry threshold. Ties prefer the longest phrase, then the earliest
    span.
    """
    tokens = normalize(transcript)
    if not tokens:
        return None

    exact_hits: list[CommandMatch] = []
    for command_id, phrase_list in registry.phrases.items():
        for phrase in phrase_list:
            phrase_tokens = phrase.split()
            start = _find_subsequence(tokens, phrase_tokens)
            if start is not None:
                exact_hits.append(
                    CommandMatch(
                        command_id=command_id,
                        matched_span=(start, start + len(phrase_tokens)),
                        score=1.0,
                        phrase=phrase,
                    )
                )
    if exact_hits:
        exact_hits.sort(
            key=lambda m: (
                -(m.matched_span[1] - m.matched_span[0]),
                m.matched_span[0],
                m.command_id,
            )
        )
        return exact_hits[0]

    best: CommandMatch | None = None
    best_key: tuple | None = None
    for command_id, phrase_list in registry.phrases.items():
        for phrase in phrase_list:
            phrase_tokens = phrase.split()
            length = len(phrase_tokens)
            for width in (length - 1, length, length + 1):
                if width < 1 or width > len(tokens):
                    continue
                for start in range(len(tokens) - width + 1):
                    window = tokens[start : start + width]
                    score = similarity(window, phrase_tokens)
                    if score < registry.threshold:
                        continue
                    key = (-score, -length, start, width, command_id, phrase)
                    if best_key is None or key < best_key:
                        best_key = key
                        best = CommandMatch(
                            command_id=command_id,
                            matched_span=(start, start + width),
                            score=score,
                            phrase=phrase,
                        )
    return best
