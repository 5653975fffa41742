"""Question-necessity and tone-classification scoring."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

ANNOTATION_LABELS = ("necessary", "unnecessary", "skipped")


def eqf(labels: list[str]) -> float:
    """Essential Question Fraction: necessary / all annotated questions."""
    if not labels:
        raise ValueError("no annotations")
    for label in labels:
        if label not in ANNOTATION_LABELS:
            raise ValueError(f"unknown annotation label {label!r}")
    counts = Counter(labels)
    return counts["necessary"] / len(labels)


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ToneScores:
    per_class: dict[str, ClassScores]
    accuracy: float
    macro_f1: float
    weighted_f1: float


def tone_eval(gold: list[str], predicted: list[str]) -> ToneScores:
    """Per-class precision/recall/F1 plus accuracy and macro/weighted F1.

    Classes are the union of gold and predicted labels. Zero denominators
    yield 0 by convention, so a class that is never predicted scores
    precision 0 and F1 0.
    """
    if len(gold) != len(predicted):
        raise ValueError("gold and predicted lengths differ")
    if not gold:
        raise ValueError("empty label set")

    classes = sorted(set(gold) | set(predicted))
    support = Counter(gold)
    predicted_counts = Counter(predicted)
    true_positive = Counter(g for g, p in zip(gold, predicted) if g == p)

    per_class: dict[str, ClassScores] = {}
    for cls in classes:
        tp = true_positive[cls]
        precision = tp / predicted_counts[cls] if predicted_counts[cls] else 0.0
        recall = tp / support[cls] if support[cls] else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        per_class[cls] = ClassScores(precision, recall, f1, support[cls])

    accuracy = sum(true_positive.values()) / len(gold)
    macro_f1 = sum(s.f1 for s in per_class.values()) / len(classes)
    total_support = sum(support.values())
    weighted_f1 = (
        sum(s.f1 * s.support for s in per_class.values()) / total_support
    )
    return ToneScores(
        per_class=per_class,
        accuracy=accuracy,
        macro_f1=macro_f1,
        weighted_f1=weighted_f1,
    )
