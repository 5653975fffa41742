"""Schema parsing for model replies.

JSON replies tolerate surrounding whitespace and a single markdown code
fence, nothing else. Schema violations raise ReplyParseError so the gateway
can issue its one corrective reprompt before giving up.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

ISSUE_TYPES = ("missing", "inconsistent", "inaccurate", "unsupported")

_FENCE = re.compile(r"\A```[a-zA-Z]*\n(?P<body>.*?)\n?```\Z", re.DOTALL)


class ReplyParseError(ValueError):
    pass


@dataclass(frozen=True)
class NextQuestion:
    question: str
    followup_needed: bool


@dataclass(frozen=True)
class FactIssue:
    issue_type: str
    detail: str
    qa_reference: str = ""

    def __post_init__(self) -> None:
        if self.issue_type not in ISSUE_TYPES:
            raise ValueError(f"unknown issue type {self.issue_type!r}")
        if not self.detail:
            raise ValueError("issue detail is empty")


@dataclass(frozen=True)
class ParsedFactCheck:
    passed: bool
    issues: tuple[FactIssue, ...]


@dataclass(frozen=True)
class Tone:
    tone: str
    reasoning: str = ""


@dataclass(frozen=True)
class DependencyVerdict:
    question_id: int
    question: str
    status: str  # AFFECTED | UNAFFECTED
    reasoning: str = ""


@dataclass(frozen=True)
class Dependency:
    affected_questions: tuple[DependencyVerdict, ...]
    summary: str = ""


@dataclass(frozen=True)
class PlainText:
    text: str


@dataclass(frozen=True)
class StructuredReply:
    raw_text: str
    parsed: object
    schema: str = "plain_text"
    warnings: tuple[str, ...] = field(default=())


def strip_code_fence(text: str) -> str:
    stripped = text.strip()
    match = _FENCE.match(stripped)
    return match.group("body") if match else stripped


def _load_json(raw: str) -> dict:
    try:
        data = json.loads(strip_code_fence(raw))
    except json.JSONDecodeError as exc:
        raise ReplyParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ReplyParseError("top-level JSON value is not an object")
    return data


def parse_reply(raw: str, schema: str) -> StructuredReply:
    if schema == "plain_text":
        return StructuredReply(raw, PlainText(raw.strip()), schema)
    if schema == "next_question":
        data = _load_json(raw)
        question = data.get("question")
        followup = data.get("followup_needed")
        if not isinstance(question, str) or not isinstance(followup, bool):
            raise ReplyParseError("expected {question: string, followup_needed: boolean}")
        return StructuredReply(raw, NextQuestion(question, followup), schema)
    if schema == "fact_check":
        data = _load_json(raw)
        passed = data.get("passed")
        raw_issues = data.get("issues", [])
        if not isinstance(passed, bool) or not isinstance(raw_issues, list):
            raise ReplyParseError("expected {passed: boolean, issues: list}")
        issues = []
        for item in raw_issues:
            try:
                issues.append(
                    FactIssue(
                        issue_type=item.get("type", ""),
                        detail=item.get("detail", ""),
                        qa_reference=item.get("qa_reference", ""),
                    )
                )
            except (AttributeError, ValueError) as exc:
                raise ReplyParseError(f"bad issue entry: {exc}") from exc
        return StructuredReply(raw, ParsedFactCheck(passed, tuple(issues)), schema)
    if schema == "tone":
        data = _load_json(raw)
        tone = data.get("tone")
        if not isinstance(tone, str) or not tone:
            raise ReplyParseError("expected {tone: string, reasoning: string}")
        return StructuredReply(raw, Tone(tone.strip().lower(), str(data.get("reasoning", ""))), schema)
    if schema == "dependency":
        data = _load_json(raw)
        entries = data.get("affectedQuestions")
        if not isinstance(entries, list):
            raise ReplyParseError("expected {affectedQuestions: list, summary: string}")
        verdicts = []
        for item in entries:
            if not isinstance(item, dict):
                raise ReplyParseError("affectedQuestions entries must be objects")
            status = item.get("status")
            question_id = item.get("questionId")
            if status not in ("AFFECTED", "UNAFFECTED") or not isinstance(question_id, int):
                raise ReplyParseError("bad dependency verdict entry")
            verdicts.append(
                DependencyVerdict(
                    question_id=question_id,
                    question=str(item.get("question", "")),
                    status=status,
                    reasoning=str(item.get("reasoning", "")),
                )
            )
        return StructuredReply(raw, Dependency(tuple(verdicts), str(data.get("summary", ""))), schema)
    raise ValueError(f"unknown schema {schema!r}")
