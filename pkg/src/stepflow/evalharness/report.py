"""Corpus-level metric aggregation and report shaping."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

from .diffing import EditCounts, word_diff
from .diversity import Embedder, semantic_diversity
from .scoring import ToneScores, eqf, tone_eval
from .textstats import (
    avg_sentence_length,
    fk_grade,
    flesch_reading_ease,
    normalize_whitespace,
    tokenize_words,
    ttr,
)

TASKS = ("write", "reply")


@dataclass(frozen=True)
class DraftPair:
    """A speech-generated draft and its manually revised counterpart."""

    original: str
    revised: str
    task: str = "write"
    tool_tag: str = ""

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        object.__setattr__(self, "original", normalize_whitespace(self.original))
        object.__setattr__(self, "revised", normalize_whitespace(self.revised))


@dataclass
class MetricReport:
    """All harness metrics that were computed for one corpus."""

    revision_effort: dict | None = None
    fre: float | None = None
    fk_grade: float | None = None
    avg_sentence_len: float | None = None
    ttr: float | None = None
    semantic_diversity: float | None = None
    eqf: float | None = None
    tone_scores: ToneScores | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        data = asdict(self)
        return {k: v for k, v in data.items() if v not in (None, [])}


def pair_edit_counts(pair: DraftPair, mode: str = "span") -> EditCounts:
    return word_diff(
        tokenize_words(pair.original), tokenize_words(pair.revised), mode=mode
    )


def diff_report(pairs: Iterable[DraftPair], mode: str = "span") -> list[dict]:
    rows = []
    for pair in pairs:
        counts = pair_edit_counts(pair, mode=mode)
        rows.append(
            {
                "task": pair.task,
                "tool_tag": pair.tool_tag,
                "insertions": counts.insertions,
                "deletions": counts.deletions,
                "replacements": counts.replacements,
                "total_edits": counts.total_edits,
            }
        )
    return rows


def readability_report(pairs: Iterable[DraftPair]) -> list[dict]:
    rows = []
    for pair in pairs:
        row: dict = {"task": pair.task, "tool_tag": pair.tool_tag}
        for stage, text in (("original", pair.original), ("revised", pair.revised)):
            row[f"{stage}_fre"] = flesch_reading_ease(text)
            row[f"{stage}_fk_grade"] = fk_grade(text)
            row[f"{stage}_avg_sentence_len"] = avg_sentence_length(text)
            row[f"{stage}_ttr"] = ttr(text)
        rows.append(row)
    return rows


def diversity_report(pairs: Iterable[DraftPair], embedder: Embedder) -> list[dict]:
    return [
        {
            "task": pair.task,
            "tool_tag": pair.tool_tag,
            "semantic_diversity": semantic_diversity(
                pair.original, pair.revised, embedder
            ),
        }
        for pair in pairs
    ]


def eqf_report(labels: list[str]) -> dict:
    from collections import Counter

    counts = Counter(labels)
    return {
        "necessary": counts.get("necessary", 0),
        "unnecessary": counts.get("unnecessary", 0),
        "skipped": counts.get("skipped", 0),
        "total": len(labels),
        "eqf": eqf(labels),
    }


def tone_report(gold: list[str], predicted: list[str]) -> dict:
    """Per-class rows sorted by F1 descending plus summary footer rows."""
    scores = tone_eval(gold, predicted)
    rows = [
        {
            "tone": cls,
            "precision": s.precision,
            "recall": s.recall,
            "f1": s.f1,
            "support": s.support,
        }
        for cls, s in sorted(
            scores.per_class.items(), key=lambda kv: (-kv[1].f1, kv[0])
        )
    ]
    return {
        "classes": rows,
        "accuracy": scores.accuracy,
        "macro_f1": scores.macro_f1,
        "weighted_f1": scores.weighted_f1,
    }


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def load_draft_pairs(path: str | Path) -> list[DraftPair]:
    return [
        DraftPair(
            original=rec["original"],
            revised=rec["revised"],
            task=rec.get("task", "write"),
            tool_tag=rec.get("tool_tag", ""),
        )
        for rec in read_jsonl(path)
    ]
