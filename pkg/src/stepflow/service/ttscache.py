"""Speech-synthesis cache with LRU eviction at a byte budget."""

from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable


def cache_key(voice_id: str, text: str) -> str:
    digest = hashlib.sha256()
    digest.update(voice_id.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(text.encode("utf-8"))
    return digest.hexdigest()


@dataclass
class TtsCacheEntry:
    key: str
    audio: bytes
    created_at: float
    hit_count: int = 0


class TtsCache:
    """Keyed by sha256(voice_id, text); same key always yields the same bytes."""

    def __init__(
        self,
        synthesize: Callable[[str], bytes],
        voice_id: str = "alloy",
        max_bytes: int = 16 * 1024 * 1024,
        clock: Callable[[], float] | None = None,
    ) -> None:
        self.synthesize = synthesize
        self.voice_id = voice_id
        self.max_bytes = max_bytes
        self.clock = clock or (lambda: 0.0)
        self._entries: "OrderedDict[str, TtsCacheEntry]" = OrderedDict()
        self._size = 0
        self._lock = threading.Lock()

    def get_or_synthesize(self, text: str) -> tuple[TtsCacheEntry, bool]:
        """Return (entry, was_hit); synthesis failures leave the cache untouched."""
        key = cache_key(self.voice_id, text)
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None:
                entry.hit_count += 1
                self._entries.move_to_end(key)
                return entry, True
        audio = self.synthesize(text)
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                entry = TtsCacheEntry(key=key, audio=audio, created_at=self.clock())
                self._entries[key] = entry
                self._size += len(audio)
                self._evict()
            else:
                entry.hit_count += 1
                self._entries.move_to_end(key)
                return entry, True
            return entry, False

    def get(self, key: str) -> TtsCacheEntry | None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None:
                self._entries.move_to_end(key)
            return entry

    def _evict(self) -> None:
        while self._size > self.max_bytes and len(self._entries) > 1:
            _, evicted = self._entries.popitem(last=False)
            self._size -= len(evicted.audio)

    def __len__(self) -> int:
        return len(self._entries)
