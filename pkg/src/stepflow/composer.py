"""Finished conversation graph -> final draft.

Order is fixed: classify tone, generate, then loop fact-check/correct until
the checker passes or the pass cap (default 10) is hit. Every pass is
recorded in the provenance trail with the draft hash, the report, timing,
and the word-level edits the correction introduced, so the "minimal changes"
instruction stays auditable.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

from .errors import MalformedModelOutputError, NothingToComposeError
from .evalharness.diffing import EditCounts, word_diff
from .evalharness.textstats import tokenize_words
from .gateway.parsing import FactIssue, ParsedFactCheck, PlainText, Tone
from .gateway.providers import Gateway
from .gateway.templates import TONE_NAMES, load_tone_definitions, render
from .memory import MemoryContext
from .qa import ConversationGraph, format_history

DEFAULT_MAX_PASSES = 10


@dataclass(frozen=True)
class ToneLabel:
    name: str
    description: str

    def __post_init__(self) -> None:
        if self.name not in TONE_NAMES:
            raise ValueError(f"unknown tone {self.name!r}")


@dataclass(frozen=True)
class FactCheckReport:
    passed: bool
    issues: tuple[FactIssue, ...] = ()

    @classmethod
    def from_parsed(cls, parsed: ParsedFactCheck) -> "FactCheckReport":
        # contradiction repair: a "passed" verdict with issues is a failure
        passed = parsed.passed and not parsed.issues
        return cls(passed=passed, issues=() if passed else parsed.issues)

    def __post_init__(self) -> None:
        if self.passed and self.issues:
            raise ValueError("passed report cannot carry issues")

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "issues": [
                {"type": i.issue_type, "detail": i.detail, "qa_reference": i.qa_reference}
                for i in self.issues
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FactCheckReport":
        return cls(
            passed=data["passed"],
            issues=tuple(
                FactIssue(
                    issue_type=item["type"],
                    detail=item["detail"],
                    qa_reference=item.get("qa_reference", ""),
                )
                for item in data.get("issues", [])
            ),
        )


@dataclass(frozen=True)
class PassRecord:
    pass_number: int
    draft_sha256: str
    report: FactCheckReport
    duration_ms: float
    edits_from_previous: EditCounts | None = None

    def to_audit_line(self) -> dict:
        return {
            "pass": self.pass_number,
            "passed": self.report.passed,
            "issues": self.report.to_dict()["issues"],
            "draft_sha256": self.draft_sha256,
        }

    def to_dict(self) -> dict:
        edits = self.edits_from_previous
        return {
            "pass": self.pass_number,
            "draft_sha256": self.draft_sha256,
            "report": self.report.to_dict(),
            "duration_ms": self.duration_ms,
            "edits_from_previous": (
                None
                if edits is None
                else {
                    "insertions": edits.insertions,
                    "deletions": edits.deletions,
                    "replacements": edits.replacements,
                    "total_edits": edits.total_edits,
                }
            ),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PassRecord":
        edits = data.get("edits_from_previous")
        return cls(
            pass_number=data["pass"],
            draft_sha256=data["draft_sha256"],
            report=FactCheckReport.from_dict(data["report"]),
            duration_ms=data["duration_ms"],
            edits_from_previous=None if edits is None else EditCounts(**edits),
        )


@dataclass(frozen=True)
class FinalDraft:
    text: str
    tone: ToneLabel
    passes_used: int
    residual_issues: tuple[FactIssue, ...]
    provenance: tuple[PassRecord, ...]
    tone_reasoning: str = ""
    warnings: tuple[str, ...] = ()
    first_draft: str = ""

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "tone": self.tone.name,
            "tone_description": self.tone.description,
            "tone_reasoning": self.tone_reasoning,
            "passes_used": self.passes_used,
            "residual_issues": [
                {"type": i.issue_type, "detail": i.detail, "qa_reference": i.qa_reference}
                for i in self.residual_issues
            ],
            "provenance": [record.to_dict() for record in self.provenance],
            "warnings": list(self.warnings),
            "first_draft": self.first_draft,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FinalDraft":
        return cls(
            text=data["text"],
            tone=ToneLabel(data["tone"], data["tone_description"]),
            passes_used=data["passes_used"],
            residual_issues=tuple(
                FactIssue(
                    issue_type=item["type"],
                    detail=item["detail"],
                    qa_reference=item.get("qa_reference", ""),
                )
                for item in data.get("residual_issues", [])
            ),
            provenance=tuple(
                PassRecord.from_dict(item) for item in data.get("provenance", [])
            ),
            tone_reasoning=data.get("tone_reasoning", ""),
            warnings=tuple(data.get("warnings", [])),
            first_draft=data.get("first_draft", ""),
        )


@dataclass(frozen=True)
class ComposerConfig:
    max_passes: int = DEFAULT_MAX_PASSES

    def __post_init__(self) -> None:
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def strip_wrapping(text: str) -> str:
    """Remove a wrapping code fence or quote pair the model was told not to add."""
    cleaned = text.strip()
    if cleaned.startswith("```") and cleaned.endswith("```"):
        cleaned = cleaned[3:-3]
        first_newline = cleaned.find("\n")
        if first_newline != -1 and cleaned[:first_newline].isalpha():
            cleaned = cleaned[first_newline + 1 :]
        cleaned = cleaned.strip()
    for quote in ('"', "'", "“”"):
        if len(cleaned) >= 2 and cleaned[0] == quote[0] and cleaned[-1] == quote[-1]:
            cleaned = cleaned[1:-1].strip()
            break
    return cleaned


class Composer:
    """Runs tone classification, generation, and the verification loop."""

    def __init__(
        self,
        gateway: Gateway,
        memory: MemoryContext | None = None,
        config: ComposerConfig | None = None,
    ) -> None:
        self.gateway = gateway
        self.memory = memory
        self.config = config or ComposerConfig()
        self.tone_definitions = load_tone_definitions()

    def _memory_binding(self) -> dict:
        if self.memory and self.memory.enabled and self.memory.facts:
            return {"memories": self.memory.as_object()}
        return {}

    # -- stages -----------------------------------------------------------

    def classify_tone(self, graph: ConversationGraph) -> tuple[ToneLabel, str]:
        if graph.answered_count() == 0:
            raise NothingToComposeError("nothing to compose")
        bindings = {"qa_history": format_history(graph)}
        if graph.task_kind == "reply":
            bindings["original_text"] = graph.original_text
        prompt = render("tone_classification", bindings)
        reply = self.gateway.chat_structured(prompt, "tone")
        parsed: Tone = reply.parsed
        if parsed.tone not in TONE_NAMES:
            retry_prompt = (
                prompt
                + "\n\nIMPORTANT: \"" + parsed.tone + "\" is not a valid tone. "
                + "Choose exactly one of: " + ", ".join(TONE_NAMES) + "."
            )
            reply = self.gateway.chat_structured(retry_prompt, "tone")
            parsed = reply.parsed
            if parsed.tone not in TONE_NAMES:
                raise MalformedModelOutputError(
                    f"unknown tone {parsed.tone!r} after reprompt", raw_text=reply.raw_text
                )
        label = ToneLabel(parsed.tone, self.tone_definitions[parsed.tone])
        return label, parsed.reasoning

    def generate_draft(
        self, graph: ConversationGraph, tone: ToneLabel
    ) -> tuple[str, list[str]]:
        template = "write_output" if graph.task_kind == "write" else "reply_output"
        bindings = {
            "qa_history": format_history(graph),
            "tone": tone.name,
            "tone_description": tone.description,
            **self._memory_binding(),
        }
        if graph.task_kind == "reply":
            bindings["original_text"] = graph.original_text
        reply = self.gateway.chat_structured(render(template, bindings), "plain_text")
        text: PlainText = reply.parsed
        draft = strip_wrapping(text.text)
        if not draft:
            raise MalformedModelOutputError("empty draft", raw_text=reply.raw_text)
        warnings = self._check_greeting(graph, draft)
        return draft, warnings

    def _check_greeting(self, graph: ConversationGraph, draft: str) -> list[str]:
        # reply drafts must not open with the user's own name (memory-known)
        if graph.task_kind != "reply" or not self.memory or not self.memory.enabled:
            return []
        own_name = self.memory.as_object().get("full_name", "")
        if not own_name:
            return []
        first_tokens = tokenize_words(draft)[: len(tokenize_words(own_name))]
        if first_tokens and first_tokens == tokenize_words(own_name):
            return [f"reply draft starts with the user's own name {own_name!r}"]
        return []

    def fact_check(self, graph: ConversationGraph, draft: str) -> FactCheckReport:
        if not draft:
            raise ValueError("empty draft")
        bindings = {
            "qa_history": format_history(graph),
            "draft": draft,
            **self._memory_binding(),
        }
        try:
            reply = self.gateway.chat_structured(render("fact_check", bindings), "fact_check")
        except MalformedModelOutputError as exc:
            # keep the loop alive: treat unparseable verdicts as a failing report
            return FactCheckReport(
                passed=False,
                issues=(
                    FactIssue(
                        issue_type="unsupported",
                        detail="fact checker returned malformed output",
                        qa_reference=exc.raw_text[:500],
                    ),
                ),
            )
        return FactCheckReport.from_parsed(reply.parsed)

    def correct_draft(
        self,
        graph: ConversationGraph,
        draft: str,
        issues: tuple[FactIssue, ...],
        tone: ToneLabel,
    ) -> str:
        if not issues:
            raise ValueError("no issues to correct")
        issue_lines = "\n".join(
            f"- {issue.issue_type}: {issue.detail}"
            + (f" (ref: {issue.qa_reference})" if issue.qa_reference else "")
            for issue in issues
        )
        bindings = {
            "qa_history": format_history(graph),
            "draft": draft,
            "issues": issue_lines,
            "tone": tone.name,
            "tone_description": tone.description,
        }
        reply = self.gateway.chat_structured(render("fact_correction", bindings), "plain_text")
        text: PlainText = reply.parsed
        corrected = strip_wrapping(text.text)
        if not corrected:
            raise MalformedModelOutputError("empty corrected draft", raw_text=reply.raw_text)
        return corrected

    # -- the loop -----------------------------------------------------------

    def compose(self, graph: ConversationGraph) -> FinalDraft:
        if not graph.finished:
            raise NothingToComposeError("graph is not finished")
        tone, reasoning = self.classify_tone(graph)
        draft, warnings = self.generate_draft(graph, tone)
        first_draft = draft

        provenance: list[PassRecord] = []
        previous_tokens = None
        report = FactCheckReport(passed=False, issues=())
        for pass_number in range(1, self.config.max_passes + 1):
            started = time.perf_counter()
            report = self.fact_check(graph, draft)
            duration_ms = (time.perf_counter() - started) * 1000
            tokens = tokenize_words(draft)
            edits = (
                word_diff(previous_tokens, tokens) if previous_tokens is not None else None
            )
            provenance.append(
                PassRecord(
                    pass_number=pass_number,
                    draft_sha256=_sha256(draft),
                    report=report,
                    duration_ms=duration_ms,
                    edits_from_previous=edits,
                )
            )
            previous_tokens = tokens
            if report.passed or pass_number == self.config.max_passes:
                break
            draft = self.correct_draft(graph, draft, report.issues, tone)

        return FinalDraft(
            text=draft,
            tone=tone,
            passes_used=len(provenance),
            residual_issues=() if report.passed else report.issues,
            provenance=tuple(provenance),
            tone_reasoning=reasoning,
            warnings=tuple(warnings),
            first_draft=first_draft,
        )


def provenance_jsonl(draft: FinalDraft) -> str:
    """One audit line per fact-check pass."""
    import json

    return "\n".join(json.dumps(record.to_audit_line()) for record in draft.provenance)
