from __future__ import annotations

import json

import pytest

from stepflow.gateway import Gateway, ScriptEntry

# stable substrings identifying each prompt template
WRITE_QUESTION_MARK = "investigator & thinking partner"
REPLY_INITIAL_MARK = "PERSONALIZED first question"
REPLY_QUESTION_MARK = "=== ORIGINAL MESSAGE (CONTEXT) ==="
OUTPUT_MARK = "captures the user's thinking process"
FACT_CHECK_MARK = "meticulous fact-checker"
CORRECTION_MARK = "correcting content based on fact-checking results"
TONE_MARK = "determine the most appropriate tone"
DEPENDENCY_MARK = "dependency analysis system"
SKIP_REPROMPT_MARK = "Never re-ask a skipped question"


def entry(response: str, match=None, times=None, capability="chat") -> ScriptEntry:
    return ScriptEntry(capability=capability, response=response, match=match, times=times)


def question_json(question: str, followup: bool = True) -> str:
    return json.dumps({"question": question, "followup_needed": followup})


def q_entry(question: str, followup: bool = True, times: int | None = 1) -> ScriptEntry:
    return entry(question_json(question, followup), match=WRITE_QUESTION_MARK, times=times)


def end_entry() -> ScriptEntry:
    return entry(question_json("", False), match=WRITE_QUESTION_MARK)


def tone_entry(tone: str = "friendly", reasoning: str = "warm phrasing") -> ScriptEntry:
    return entry(json.dumps({"tone": tone, "reasoning": reasoning}), match=TONE_MARK)


def draft_entry(text: str, times: int | None = None) -> ScriptEntry:
    return entry(text, match=OUTPUT_MARK, times=times)


def fact_pass_entry(times: int | None = None) -> ScriptEntry:
    return entry(json.dumps({"passed": True, "issues": []}), match=FACT_CHECK_MARK, times=times)


def fact_fail_entry(detail: str = "missing the date", times: int | None = 1) -> ScriptEntry:
    payload = {
        "passed": False,
        "issues": [{"type": "missing", "detail": detail, "qa_reference": "Q1"}],
    }
    return entry(json.dumps(payload), match=FACT_CHECK_MARK, times=times)


def correction_entry(text: str, times: int | None = None) -> ScriptEntry:
    return entry(text, match=CORRECTION_MARK, times=times)


def gateway_from(*entries: ScriptEntry) -> Gateway:
    return Gateway.from_script(list(entries))


@pytest.fixture
def write_task_script():
    """Three questions then the end-of-sequence signal, plus a compose stage."""

    def build() -> list[ScriptEntry]:
        return [
            q_entry("What is the occasion?"),
            q_entry("Who is invited?"),
            q_entry("When will it happen?"),
            end_entry(),
            tone_entry("friendly"),
            draft_entry("Hi everyone, please join our picnic on Saturday!"),
            fact_pass_entry(),
        ]

    return build
