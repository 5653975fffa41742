"""Metric harness for drafts, questions, and tone labels."""

from .diffing import EditCounts, word_diff, word_opcodes
from .diversity import cosine, semantic_diversity
from .report import DraftPair, MetricReport
from .scoring import ClassScores, ToneScores, eqf, tone_eval
from .textstats import (
    avg_sentence_length,
    count_syllables,
    fk_grade,
    flesch_reading_ease,
    normalize_whitespace,
    split_sentences,
    tokenize_words,
    ttr,
)

__all__ = [
    "EditCounts",
    "word_diff",
    "word_opcodes",
    "cosine",
    "semantic_diversity",
    "DraftPair",
    "MetricReport",
    "ClassScores",
    "ToneScores",
    "eqf",
    "tone_eval",
    "avg_sentence_length",
    "count_syllables",
    "fk_grade",
    "flesch_reading_ease",
    "normalize_whitespace",
    "split_sentences",
    "tokenize_words",
    "ttr",
]
