"""Prompt assembly for every pipeline stage.

Template bodies live as verbatim data files under stepflow/prompts/, so
prompt edits never require code changes. Rendering is literal marker
substitution: a missing required slot raises, optional blocks vanish when
their slot is unbound, and the result is checked to contain no leftover
markers.

Memory context is appended to the host prompt when (and only when) a
memories binding is present, keeping memory-off renders byte-identical to a
memory-free build.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources

from ..errors import MissingSlotError

_OPTIONAL_BLOCK = re.compile(
    r"<<optional (?P<slot>\w+)>>\n(?P<body>.*?)<<end optional>>\n", re.DOTALL
)
_MEMORY_TOGGLE_LINE = re.compile(
    r"^(?P<head>.*)\[Show if memory is on: (?P<text>.*?)\](?P<tail>.*)\n?", re.MULTILINE
)

TONE_NAMES = (
    "formal",
    "informal",
    "friendly",
    "diplomatic",
    "urgent",
    "concerned",
    "optimistic",
    "curious",
    "encouraging",
    "surprised",
    "cooperative",
    "empathetic",
    "apologetic",
    "assertive",
)


def load_tone_definitions() -> dict[str, str]:
    """The 14 tone names with their definitional text."""
    raw = resources.files("stepflow").joinpath("data/tones.json").read_text("utf-8")
    definitions = json.loads(raw)
    if tuple(definitions) != TONE_NAMES:
        raise RuntimeError("tone definition file does not match the 14-tone schema")
    return definitions


@dataclass(frozen=True)
class TemplateSpec:
    template_id: str
    filename: str
    required: tuple[str, ...]
    optional: tuple[str, ...] = ()
    memory_purpose: str | None = None  # prompting | fact_checking
    schema: str = "plain_text"


TEMPLATES: dict[str, TemplateSpec] = {
    spec.template_id: spec
    for spec in (
        TemplateSpec(
            "write_question",
            "write_question.txt",
            required=("qa_history",),
            memory_purpose="prompting",
            schema="next_question",
        ),
        TemplateSpec(
            "reply_initial_question",
            "reply_initial_question.txt",
            required=("original_text",),
            memory_purpose="prompting",
            schema="plain_text",
        ),
        TemplateSpec(
            "reply_question",
            "reply_question.txt",
            required=("qa_history", "original_text"),
            memory_purpose="prompting",
            schema="next_question",
        ),
        TemplateSpec(
            "write_output",
            "write_output.txt",
            required=("qa_history", "tone", "tone_description"),
            memory_purpose="prompting",
            schema="plain_text",
        ),
        TemplateSpec(
            "reply_output",
            "reply_output.txt",
            required=("qa_history", "original_text", "tone", "tone_description"),
            memory_purpose="prompting",
            schema="plain_text",
        ),
        TemplateSpec(
            "fact_check",
            "fact_check.txt",
            required=("qa_history", "draft"),
            memory_purpose="fact_checking",
            schema="fact_check",
        ),
        TemplateSpec(
            "fact_correction",
            "fact_correction.txt",
            required=("qa_history", "draft", "issues", "tone", "tone_description"),
            schema="plain_text",
        ),
        TemplateSpec(
            "tone_classification",
            "tone_classification.txt",
            required=("qa_history",),
            optional=("original_text",),
            schema="tone",
        ),
        TemplateSpec(
            "memory_context",
            "memory_context.txt",
            required=("memories",),
        ),
        TemplateSpec(
            "memory_fact_check",
            "memory_fact_check.txt",
            required=("memories",),
        ),
        TemplateSpec(
            "dependency_analysis",
            "dependency_analysis.txt",
            required=(
                "qa_history",
                "changed_question_id",
                "original_answer",
                "new_answer",
            ),
            schema="dependency",
        ),
    )
}


def template_body(template_id: str) -> str:
    spec = TEMPLATES[template_id]
    return resources.files("stepflow").joinpath(f"prompts/{spec.filename}").read_text("utf-8")


def _memories_json(memories) -> str:
    if isinstance(memories, str):
        return memories
    return json.dumps(memories, indent=2, sort_keys=True)


def render(template_id: str, bindings: dict | None = None) -> str:
    """Substitute bindings into a template; deterministic."""
    if template_id not in TEMPLATES:
        raise KeyError(f"unknown template {template_id!r}")
    spec = TEMPLATES[template_id]
    bindings = dict(bindings or {})

    for slot in spec.required:
        if bindings.get(slot) in (None, ""):
            raise MissingSlotError(template_id, slot)

    text = template_body(template_id)

    def keep_or_drop(match: re.Match) -> str:
        return match.group("body") if bindings.get(match.group("slot")) else ""

    text = _OPTIONAL_BLOCK.sub(keep_or_drop, text)

    if bindings.get("memories"):
        text = _MEMORY_TOGGLE_LINE.sub(
            lambda m: f"{m.group('head')}{m.group('text')}{m.group('tail')}\n", text
        )
    else:
        text = _MEMORY_TOGGLE_LINE.sub("", text)

    substitutions: dict[str, object] = {
        "[Insert Q&A history]": bindings.get("qa_history"),
        "[Insert original text]": bindings.get("original_text"),
        "[Insert generated output]": bindings.get("draft"),
        "[Insert list of issues]": bindings.get("issues"),
        "[Insert ID of changed question]": bindings.get("changed_question_id"),
        "[Insert original answer]": bindings.get("original_answer"),
        "[Insert new answer]": bindings.get("new_answer"),
        "${changedQuestionId}": bindings.get("changed_question_id"),
    }
    if "tone" in bindings and "tone_description" in bindings:
        substitutions["[Insert tone & its description]"] = (
            f"{bindings['tone']}: {bindings['tone_description']}"
        )
    if "[Insert tone category definitions]" in text:
        definitions = load_tone_definitions()
        substitutions["[Insert tone category definitions]"] = "\n".join(
            f"- {name}: {desc}" for name, desc in definitions.items()
        )
    if bindings.get("memories"):
        substitutions["[Insert object of memories]"] = _memories_json(bindings["memories"])

    # single simultaneous pass: markers inside substituted user content must
    # never be re-substituted or mistaken for unreplaced slots
    present = [marker for marker in substitutions if marker in text]
    for marker in present:
        if substitutions[marker] is None:
            raise MissingSlotError(template_id, marker)
    if present:
        pattern = re.compile("|".join(re.escape(marker) for marker in present))
        text = pattern.sub(lambda m: str(substitutions[m.group(0)]), text)

    if spec.memory_purpose and bindings.get("memories"):
        memory_template = (
            "memory_context" if spec.memory_purpose == "prompting" else "memory_fact_check"
        )
        text = text.rstrip("\n") + "\n\n" + render(
            memory_template, {"memories": bindings["memories"]}
        )
    return text
