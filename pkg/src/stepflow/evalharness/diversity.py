"""Meaning-level change between an original and a revised draft.

Diversity is one minus the cosine similarity of the two embeddings. Vectors
are unit-normalized first, so the result lives in [0, 2] but typically in
[0, 1]; identical texts score 0 under any deterministic embedder.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

Embedder = Callable[[str], Sequence[float]]


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise ValueError("embedding dimensions differ")
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(x * x for x in b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / (norm_a * norm_b)


def semantic_diversity(original: str, revised: str, embedder: Embedder) -> float:
    if not original or not revised:
        raise ValueError("empty text")
    return 1.0 - cosine(embedder(original), embedder(revised))
