"""Adaptive question loop over a linear conversation graph.

Each answered turn feeds the full history back to the model, which returns
the next question plus a followup_needed flag; a false flag is the end-of-
sequence signal that triggers draft composition. Skipped questions go into a
do-not-repeat set enforced engine-side (filter plus one reprompt), and answer
modification invalidates downstream turns either wholesale or via the
dependency-analysis verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .commands import normalize
from .errors import (
    BoundaryError,
    MalformedModelOutputError,
    NoActiveQuestionError,
    NothingToComposeError,
    UnknownTurnError,
)
from .gateway.parsing import Dependency, NextQuestion, PlainText
from .gateway.providers import Gateway
from .gateway.templates import render
from .memory import MemoryContext

TASK_KINDS = ("write", "reply")
INVALIDATION_POLICIES = ("truncate_all", "dependency_aware")
DEFAULT_MAX_QUESTIONS = 25

EMPTY_HISTORY = "(no conversation yet)"


@dataclass
class QuestionTurn:
    id: int
    question: str
    answer: str | None = None
    status: str = "pending"  # pending | answered | skipped
    followup_needed_after: bool | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "status": self.status,
            "followup_needed_after": self.followup_needed_after,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuestionTurn":
        return cls(**data)


@dataclass
class ConversationGraph:
    task_kind: str = "write"
    original_text: str | None = None
    turns: list[QuestionTurn] = field(default_factory=list)
    cursor: int = 0
    finished: bool = False
    skipped_questions: list[str] = field(default_factory=list)
    next_id: int = 1

    def active_turn(self) -> QuestionTurn | None:
        if self.turns and self.turns[self.cursor].status == "pending":
            return self.turns[self.cursor]
        return None

    def turn_by_id(self, turn_id: int) -> QuestionTurn:
        for turn in self.turns:
            if turn.id == turn_id:
                return turn
        raise UnknownTurnError(f"no turn with id {turn_id}")

    def answered_count(self) -> int:
        return sum(1 for turn in self.turns if turn.status == "answered")

    def to_dict(self) -> dict:
        return {
            "task_kind": self.task_kind,
            "original_text": self.original_text,
            "turns": [turn.to_dict() for turn in self.turns],
            "cursor": self.cursor,
            "finished": self.finished,
            "skipped_questions": list(self.skipped_questions),
            "next_id": self.next_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConversationGraph":
        return cls(
            task_kind=data["task_kind"],
            original_text=data.get("original_text"),
            turns=[QuestionTurn.from_dict(t) for t in data.get("turns", [])],
            cursor=data.get("cursor", 0),
            finished=data.get("finished", False),
            skipped_questions=list(data.get("skipped_questions", [])),
            next_id=data.get("next_id", 1),
        )


@dataclass(frozen=True)
class EngineOutcome:
    kind: str  # next_question | generation_trigger
    question: str | None = None
    turn_id: int | None = None


@dataclass(frozen=True)
class InvalidationResult:
    removed_ids: tuple[int, ...]
    kept_ids: tuple[int, ...]
    new_pending_question: str | None
    outcome: EngineOutcome
    warnings: tuple[str, ...] = ()


def format_history(graph: ConversationGraph) -> str:
    """Prompt-facing rendering of the full Q&A history plus the skip list."""
    if not graph.turns:
        return EMPTY_HISTORY
    lines: list[str] = []
    for turn in graph.turns:
        lines.append(f"Q{turn.id}: {turn.question}")
        if turn.status == "answered":
            lines.append(f"A{turn.id}: {turn.answer}")
        elif turn.status == "skipped":
            lines.append(f"A{turn.id}: [skipped by the user]")
        else:
            lines.append(f"A{turn.id}: [awaiting answer]")
    if graph.skipped_questions:
        lines.append("")
        lines.append("Questions the user skipped earlier (NEVER ask these again):")
        lines.extend(f"- {question}" for question in graph.skipped_questions)
    return "\n".join(lines)


class QaEngine:
    """Drives one conversation graph; deterministic given a scripted gateway."""

    def __init__(
        self,
        gateway: Gateway,
        memory: MemoryContext | None = None,
        max_questions: int = DEFAULT_MAX_QUESTIONS,
        invalidation_policy: str = "truncate_all",
        event_sink: Callable[[dict], None] | None = None,
    ) -> None:
        if invalidation_policy not in INVALIDATION_POLICIES:
            raise ValueError(f"unknown invalidation policy {invalidation_policy!r}")
        self.gateway = gateway
        self.memory = memory
        self.max_questions = max_questions
        self.invalidation_policy = invalidation_policy
        self.event_sink = event_sink

    # -- helpers ----------------------------------------------------------

    def _emit(self, event: str, **payload) -> None:
        if self.event_sink:
            self.event_sink({"event": event, **payload})

    def _memory_binding(self) -> dict:
        if self.memory and self.memory.enabled and self.memory.facts:
            return {"memories": self.memory.as_object()}
        return {}

    def _question_template(self, graph: ConversationGraph) -> str:
        return "write_question" if graph.task_kind == "write" else "reply_question"

    def _base_bindings(self, graph: ConversationGraph) -> dict:
        bindings = {"qa_history": format_history(graph), **self._memory_binding()}
        if graph.task_kind == "reply":
            bindings["original_text"] = graph.original_text
        return bindings

    # -- operations --------------------------------------------------------

    def start_session(
        self, task_kind: str, original_text: str | None = None
    ) -> ConversationGraph:
        if task_kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {task_kind!r}")
        if task_kind == "reply" and not original_text:
            raise ValueError("reply task requires the original text")
        graph = ConversationGraph(task_kind=task_kind, original_text=original_text)
        if task_kind == "write":
            reply = self.gateway.chat_structured(
                render("write_question", self._base_bindings(graph)), "next_question"
            )
            parsed: NextQuestion = reply.parsed
            if not parsed.followup_needed or not parsed.question.strip():
                raise MalformedModelOutputError(
                    "model declined to ask a first question", raw_text=reply.raw_text
                )
            question = parsed.question.strip()
        else:
            reply = self.gateway.chat_structured(
                render("reply_initial_question", self._base_bindings(graph)),
                "plain_text",
            )
            text: PlainText = reply.parsed
            if not text.text:
                raise MalformedModelOutputError(
                    "empty initial reply question", raw_text=reply.raw_text
                )
            question = text.text
        self._append_question(graph, question)
        return graph

    def _append_question(self, graph: ConversationGraph, question: str) -> QuestionTurn:
        turn = QuestionTurn(id=graph.next_id, question=question)
        graph.next_id += 1
        graph.turns.append(turn)
        graph.cursor = len(graph.turns) - 1
        self._emit("question_added", ids=[turn.id], question=question)
        return turn

    def _require_active(self, graph: ConversationGraph) -> QuestionTurn:
        turn = graph.active_turn()
        if graph.finished or turn is None:
            raise NoActiveQuestionError("no active question")
        return turn

    def submit_answer(self, graph: ConversationGraph, answer_text: str) -> EngineOutcome:
        turn = self._require_active(graph)
        answer_text = answer_text.strip()
        if not answer_text:
            raise ValueError("empty answer")
        turn.answer = answer_text
        turn.status = "answered"
        self._emit("answer_set", ids=[turn.id])
        return self._generate_next(graph, after_turn=turn)

    def skip_question(self, graph: ConversationGraph) -> EngineOutcome:
        turn = self._require_active(graph)
        turn.status = "skipped"
        self._record_skip(graph, turn.question)
        self._emit("question_skipped", ids=[turn.id])
        return self._generate_next(graph, after_turn=turn)

    def _record_skip(self, graph: ConversationGraph, question: str) -> None:
        norm = " ".join(normalize(question))
        if norm and norm not in graph.skipped_questions:
            graph.skipped_questions.append(norm)

    def _is_skipped_repeat(self, graph: ConversationGraph, question: str) -> bool:
        return " ".join(normalize(question)) in graph.skipped_questions

    def _finish_graph(self, graph: ConversationGraph) -> EngineOutcome:
        graph.finished = True
        self._emit("finished", ids=[])
        return EngineOutcome(kind="generation_trigger")

    def _generate_next(
        self, graph: ConversationGraph, after_turn: QuestionTurn | None = None
    ) -> EngineOutcome:
        if len(graph.turns) >= self.max_questions:
            self._emit("question_cap_reached", ids=[], limit=self.max_questions)
            return self._finish_graph(graph)

        prompt = render(self._question_template(graph), self._base_bindings(graph))
        reply = self.gateway.chat_structured(prompt, "next_question")
        parsed: NextQuestion = reply.parsed
        if after_turn is not None:
            after_turn.followup_needed_after = parsed.followup_needed

        if parsed.followup_needed and self._is_skipped_repeat(graph, parsed.question):
            reprompt = (
                prompt
                + "\n\nIMPORTANT: Your previous question repeated one the user already "
                "skipped. Never re-ask a skipped question; ask a different one."
            )
            reply = self.gateway.chat_structured(reprompt, "next_question")
            parsed = reply.parsed
            if after_turn is not None:
                after_turn.followup_needed_after = parsed.followup_needed
            if parsed.followup_needed and self._is_skipped_repeat(graph, parsed.question):
                raise MalformedModelOutputError(
                    "model repeated a skipped question after reprompt",
                    raw_text=reply.raw_text,
                )

        if not parsed.followup_needed:
            return self._finish_graph(graph)
        question = parsed.question.strip()
        if not question:
            raise MalformedModelOutputError(
                "followup_needed without a question", raw_text=reply.raw_text
            )
        turn = self._append_question(graph, question)
        return EngineOutcome(kind="next_question", question=turn.question, turn_id=turn.id)

    def navigate(
        self,
        graph: ConversationGraph,
        direction: str | None = None,
        target_id: int | None = None,
    ) -> int:
        if target_id is not None:
            turn = graph.turn_by_id(target_id)
            graph.cursor = graph.turns.index(turn)
        elif direction == "next":
            if graph.cursor + 1 >= len(graph.turns):
                raise BoundaryError("boundary")
            graph.cursor += 1
        elif direction == "previous":
            if graph.cursor == 0:
                raise BoundaryError("boundary")
            graph.cursor -= 1
        else:
            raise ValueError("navigate needs a direction or target_id")
        self._emit("cursor_moved", ids=[graph.turns[graph.cursor].id])
        return graph.cursor

    def modify_answer(
        self,
        graph: ConversationGraph,
        question_id: int,
        new_answer: str,
        policy: str | None = None,
    ) -> InvalidationResult:
        policy = policy or self.invalidation_policy
        if policy not in INVALIDATION_POLICIES:
            raise ValueError(f"unknown invalidation policy {policy!r}")
        turn = graph.turn_by_id(question_id)
        if turn.status == "pending":
            raise NoActiveQuestionError(
                "modify targets an answered or skipped turn; answer the pending one"
            )
        new_answer = new_answer.strip()
        if not new_answer:
            raise ValueError("empty answer")
        original_answer = turn.answer or "[skipped by the user]"
        turn.answer = new_answer
        turn.status = "answered"
        self._emit("answer_set", ids=[turn.id])

        warnings: list[str] = []
        downstream = [t for t in graph.turns if t.id > question_id]
        if policy == "truncate_all":
            removed = [t.id for t in downstream]
        else:
            removed, fell_back = self._dependency_verdicts(
                graph, turn, original_answer, new_answer, downstream
            )
            if fell_back:
                removed = [t.id for t in downstream]
                warnings.append("dependency analysis failed; fell back to truncate_all")
                self._emit("invalidation_fallback", ids=removed)

        kept = [t.id for t in downstream if t.id not in removed]
        if removed:
            for t in graph.turns:
                if t.id in removed and t.status == "skipped":
                    self._record_skip(graph, t.question)
            graph.turns = [t for t in graph.turns if t.id not in removed]
            self._emit("turns_removed", ids=sorted(removed))
        graph.cursor = min(graph.cursor, len(graph.turns) - 1)
        graph.finished = False

        if graph.turns[-1].status == "pending":
            # the surviving pending turn (kept as unaffected) stays the next
            # question; generating another would break linearity
            graph.cursor = len(graph.turns) - 1
            survivor = graph.turns[-1]
            outcome = EngineOutcome(
                kind="next_question", question=survivor.question, turn_id=survivor.id
            )
        else:
            outcome = self._generate_next(graph)
        return InvalidationResult(
            removed_ids=tuple(sorted(removed)),
            kept_ids=tuple(sorted(kept)),
            new_pending_question=outcome.question,
            outcome=outcome,
            warnings=tuple(warnings),
        )

    def _dependency_verdicts(
        self,
        graph: ConversationGraph,
        changed: QuestionTurn,
        original_answer: str,
        new_answer: str,
        downstream: list[QuestionTurn],
    ) -> tuple[list[int], bool]:
        if not downstream:
            return [], False
        bindings = {
            "qa_history": format_history(graph),
            "changed_question_id": changed.id,
            "original_answer": original_answer,
            "new_answer": new_answer,
        }
        try:
            reply = self.gateway.chat_structured(
                render("dependency_analysis", bindings), "dependency"
            )
        except MalformedModelOutputError:
            return [], True
        verdicts: Dependency = reply.parsed
        status_by_id = {v.question_id: v.status for v in verdicts.affected_questions}
        downstream_ids = {t.id for t in downstream}
        removed = [
            turn_id
            for turn_id, status in status_by_id.items()
            if status == "AFFECTED" and turn_id in downstream_ids
        ]
        return removed, False

    def finish(self, graph: ConversationGraph) -> EngineOutcome:
        if graph.answered_count() == 0:
            raise NothingToComposeError("nothing to compose")
        pending = graph.active_turn()
        if pending is not None:
            pending.status = "skipped"
            self._record_skip(graph, pending.question)
            self._emit("question_skipped", ids=[pending.id])
        return self._finish_graph(graph)


def question_stats(graphs: list[ConversationGraph]) -> dict:
    """Arithmetic means over a session set, word counts via the harness tokenizer."""
    from .evalharness.textstats import tokenize_words

    if not graphs:
        raise ValueError("empty session set")
    received = sum(len(g.turns) for g in graphs)
    answered = sum(g.answered_count() for g in graphs)
    skipped = sum(1 for g in graphs for t in g.turns if t.status == "skipped")
    question_words = [len(tokenize_words(t.question)) for g in graphs for t in g.turns]
    answer_words = [
        len(tokenize_words(t.answer))
        for g in graphs
        for t in g.turns
        if t.status == "answered" and t.answer
    ]
    return {
        "mean_received": received / len(graphs),
        "mean_answered": answered / len(graphs),
        "mean_skipped": skipped / len(graphs),
        "answer_rate": answered / received if received else 0.0,
        "mean_question_words": (
            sum(question_words) / len(question_words) if question_words else 0.0
        ),
        "mean_answer_words": (
            sum(answer_words) / len(answer_words) if answer_words else 0.0
        ),
    }
