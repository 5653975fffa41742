from __future__ import annotations

import json

import pytest

from stepflow.commands import normalize
from stepflow.errors import (
    BoundaryError,
    MalformedModelOutputError,
    NoActiveQuestionError,
    NothingToComposeError,
    UnknownTurnError,
)
from stepflow.qa import ConversationGraph, QaEngine, question_stats

from .conftest import (
    DEPENDENCY_MARK,
    REPLY_INITIAL_MARK,
    SKIP_REPROMPT_MARK,
    end_entry,
    entry,
    gateway_from,
    q_entry,
    question_json,
)


def make_engine(*entries, **kwargs) -> QaEngine:
    return QaEngine(gateway_from(*entries), **kwargs)


def answered_graph(n: int, engine: QaEngine) -> ConversationGraph:
    graph = engine.start_session("write")
    for i in range(n - 1):
        engine.submit_answer(graph, f"answer {i + 1}")
    return graph


class TestStartSession:
    def test_write_has_one_pending_turn(self):
        engine = make_engine(q_entry("What is the occasion?"))
        graph = engine.start_session("write")
        assert len(graph.turns) == 1
        assert graph.cursor == 0
        assert graph.turns[0].status == "pending"

    def test_reply_uses_initial_reply_template(self):
        engine = make_engine(
            entry("What happened with the final project?", match=REPLY_INITIAL_MARK)
        )
        graph = engine.start_session(
            "reply", "Dear student, I noticed your final project was not submitted."
        )
        assert graph.turns[0].question == "What happened with the final project?"

    def test_reply_without_text_rejected(self):
        with pytest.raises(ValueError):
            make_engine().start_session("reply", "")


class TestSubmitAnswer:
    def test_followup_false_triggers_generation(self):
        engine = make_engine(q_entry("Q one?"), end_entry())
        graph = engine.start_session("write")
        outcome = engine.submit_answer(graph, "my answer")
        assert outcome.kind == "generation_trigger"
        assert graph.finished is True
        assert len(graph.turns) == 1
        assert graph.turns[0].followup_needed_after is False

    def test_followup_true_appends_turn(self):
        engine = make_engine(q_entry("Q one?"), q_entry("Q two?"))
        graph = engine.start_session("write")
        outcome = engine.submit_answer(graph, "my answer")
        assert outcome.kind == "next_question"
        assert len(graph.turns) == 2
        assert graph.cursor == 1
        assert graph.turns[0].status == "answered"

    def test_answering_answered_turn_rejected(self):
        engine = make_engine(q_entry("Q one?"), q_entry("Q two?"))
        graph = engine.start_session("write")
        engine.submit_answer(graph, "first")
        engine.navigate(graph, direction="previous")
        with pytest.raises(NoActiveQuestionError):
            engine.submit_answer(graph, "again")

    def test_empty_answer_rejected(self):
        engine = make_engine(q_entry("Q one?"))
        graph = engine.start_session("write")
        with pytest.raises(ValueError):
            engine.submit_answer(graph, "   ")

    def test_question_cap_finishes_session(self):
        entries = [q_entry(f"Q{i}?") for i in range(1, 4)]
        engine = make_engine(*entries, max_questions=3)
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        engine.submit_answer(graph, "a2")
        outcome = engine.submit_answer(graph, "a3")
        assert outcome.kind == "generation_trigger"
        assert graph.finished


class TestSkip:
    def test_skip_records_do_not_repeat(self):
        engine = make_engine(q_entry("Q one?"), q_entry("Q two?"))
        graph = engine.start_session("write")
        outcome = engine.skip_question(graph)
        assert graph.turns[0].status == "skipped"
        assert graph.turns[0].answer is None
        assert " ".join(normalize("Q one?")) in graph.skipped_questions
        assert outcome.kind == "next_question"

    def test_skip_list_injected_into_prompts(self):
        captured = []

        class SpyBackend:
            def chat(self, prompt):
                captured.append(prompt)
                return question_json(f"Q{len(captured) + 1}?")

        engine = QaEngine(gateway_from())
        engine.gateway.backend = SpyBackend()
        graph = engine.start_session("write")
        engine.skip_question(graph)
        assert "NEVER ask these again" in captured[-1]
        assert "q1" in captured[-1].lower()

    def test_repeated_skipped_question_filtered_by_reprompt(self):
        engine = make_engine(
            q_entry("Where will you meet?"),
            # the model tries to re-ask the skipped question once...
            q_entry("Where will you meet?", times=1),
            # ...and offers a fresh one only on the corrective reprompt
            entry(question_json("What time works best?"), match=SKIP_REPROMPT_MARK),
        )
        graph = engine.start_session("write")
        outcome = engine.skip_question(graph)
        assert outcome.question == "What time works best?"
        norms = {" ".join(normalize(t.question)) for t in graph.turns}
        assert " ".join(normalize("Where will you meet?")) in graph.skipped_questions
        assert len([t for t in graph.turns if t.status == "pending"]) == 1

    def test_reprompt_failure_raises(self):
        engine = make_engine(
            q_entry("Where will you meet?"),
            q_entry("Where will you meet?", times=1),
            entry(question_json("Where will you meet?"), match=SKIP_REPROMPT_MARK),
        )
        graph = engine.start_session("write")
        with pytest.raises(MalformedModelOutputError):
            engine.skip_question(graph)

    def test_skip_on_finished_graph_rejected(self):
        engine = make_engine(q_entry("Q one?"), end_entry())
        graph = engine.start_session("write")
        engine.submit_answer(graph, "done")
        with pytest.raises(NoActiveQuestionError):
            engine.skip_question(graph)

    def test_skip_final_question_can_trigger_generation(self):
        engine = make_engine(q_entry("Q one?"), q_entry("Q two?"), end_entry())
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        outcome = engine.skip_question(graph)
        assert outcome.kind == "generation_trigger"
        assert graph.finished


class TestNavigate:
    def test_previous_and_next(self):
        engine = make_engine(q_entry("Q1?"), q_entry("Q2?"), q_entry("Q3?"), q_entry("Q4?"))
        graph = engine.start_session("write")
        for answer in ("a1", "a2", "a3"):
            engine.submit_answer(graph, answer)
        assert graph.cursor == 3
        assert engine.navigate(graph, direction="previous") == 2
        assert engine.navigate(graph, direction="next") == 3

    def test_next_at_end_is_boundary(self):
        engine = make_engine(q_entry("Q1?"))
        graph = engine.start_session("write")
        with pytest.raises(BoundaryError):
            engine.navigate(graph, direction="next")

    def test_previous_at_start_is_boundary(self):
        engine = make_engine(q_entry("Q1?"))
        graph = engine.start_session("write")
        with pytest.raises(BoundaryError):
            engine.navigate(graph, direction="previous")

    def test_navigation_does_not_mutate_turns(self):
        engine = make_engine(q_entry("Q1?"), q_entry("Q2?"))
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        before = [t.to_dict() for t in graph.turns]
        engine.navigate(graph, direction="previous")
        assert [t.to_dict() for t in graph.turns] == before

    def test_target_of_removed_turn_rejected(self):
        engine = make_engine(
            q_entry("Q1?"), q_entry("Q2?"), q_entry("Q3?"), q_entry("fresh?")
        )
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        engine.submit_answer(graph, "a2")
        engine.modify_answer(graph, 1, "changed", policy="truncate_all")
        with pytest.raises(UnknownTurnError):
            engine.navigate(graph, target_id=2)


def dependency_response(verdicts: dict[int, str]) -> str:
    return json.dumps(
        {
            "affectedQuestions": [
                {"questionId": qid, "question": f"Q{qid}?", "status": status, "reasoning": "r"}
                for qid, status in verdicts.items()
            ],
            "summary": "scripted",
        }
    )


class TestModifyAnswer:
    def five_turn_graph(self, *extra_entries, policy="truncate_all"):
        entries = [q_entry(f"Q{i}?") for i in range(1, 6)] + list(extra_entries)
        engine = make_engine(*entries, invalidation_policy=policy)
        graph = engine.start_session("write")
        for i in range(1, 5):
            engine.submit_answer(graph, f"a{i}")
        assert len(graph.turns) == 5
        return engine, graph

    def test_truncate_all_removes_downstream(self):
        engine, graph = self.five_turn_graph(q_entry("fresh question?"))
        result = engine.modify_answer(graph, 2, "new answer")
        assert result.removed_ids == (3, 4, 5)
        assert result.kept_ids == ()
        assert [t.id for t in graph.turns] == [1, 2, 6]
        assert graph.turns[1].answer == "new answer"
        assert result.new_pending_question == "fresh question?"

    def test_dependency_aware_honors_verdicts(self):
        engine, graph = self.five_turn_graph(
            entry(
                dependency_response({3: "AFFECTED", 4: "UNAFFECTED", 5: "AFFECTED"}),
                match=DEPENDENCY_MARK,
            ),
            q_entry("fresh question?"),
            policy="dependency_aware",
        )
        result = engine.modify_answer(graph, 2, "new answer")
        assert result.removed_ids == (3, 5)
        assert result.kept_ids == (4,)
        assert [t.id for t in graph.turns] == [1, 2, 4, 6]

    def test_dependency_never_removes_upstream_or_changed(self):
        engine, graph = self.five_turn_graph(
            entry(
                dependency_response({1: "AFFECTED", 2: "AFFECTED", 4: "AFFECTED"}),
                match=DEPENDENCY_MARK,
            ),
            q_entry("fresh question?"),
            policy="dependency_aware",
        )
        result = engine.modify_answer(graph, 2, "new answer")
        assert result.removed_ids == (4,)
        assert {t.id for t in graph.turns} >= {1, 2}

    def test_identical_answer_still_runs_dependency_analysis(self):
        engine, graph = self.five_turn_graph(
            entry(dependency_response({}), match=DEPENDENCY_MARK),
            policy="dependency_aware",
        )
        old = graph.turns[1].answer
        calls_before = engine.gateway.backend.counters["chat"]
        result = engine.modify_answer(graph, 2, old)
        assert graph.turns[1].answer == old
        # dependency analysis ran even though the answer is unchanged; the
        # surviving pending turn means no fresh generation call
        assert engine.gateway.backend.counters["chat"] == calls_before + 1
        assert result.removed_ids == ()
        assert result.kept_ids == (3, 4, 5)
        assert result.new_pending_question == "Q5?"

    def test_surviving_pending_turn_stays_the_next_question(self):
        engine, graph = self.five_turn_graph(
            entry(
                dependency_response({3: "AFFECTED", 4: "UNAFFECTED", 5: "UNAFFECTED"}),
                match=DEPENDENCY_MARK,
            ),
            policy="dependency_aware",
        )
        result = engine.modify_answer(graph, 2, "new answer")
        assert result.removed_ids == (3,)
        assert [t.id for t in graph.turns] == [1, 2, 4, 5]
        pending = [t for t in graph.turns if t.status == "pending"]
        assert len(pending) == 1 and pending[0].id == 5
        assert result.new_pending_question == "Q5?"
        assert graph.cursor == 3

    def test_malformed_dependency_falls_back_to_truncate(self):
        engine, graph = self.five_turn_graph(
            entry("not json", match=DEPENDENCY_MARK),
            entry("still not json", match=DEPENDENCY_MARK),
            q_entry("fresh question?"),
            policy="dependency_aware",
        )
        result = engine.modify_answer(graph, 2, "new answer")
        assert result.removed_ids == (3, 4, 5)
        assert any("fell back" in warning for warning in result.warnings)

    def test_unknown_id_rejected(self):
        engine, graph = self.five_turn_graph()
        with pytest.raises(UnknownTurnError):
            engine.modify_answer(graph, 99, "x")

    def test_modify_skipped_turn_makes_it_answered(self):
        engine = make_engine(
            q_entry("Q1?"), q_entry("Q2?"), q_entry("Q3?"), q_entry("fresh?")
        )
        graph = engine.start_session("write")
        engine.skip_question(graph)
        engine.submit_answer(graph, "a2")
        result = engine.modify_answer(graph, 1, "late answer")
        assert graph.turns[0].status == "answered"
        assert graph.turns[0].answer == "late answer"
        assert result.removed_ids == (2, 3)


class TestFinish:
    def test_finish_after_one_answer(self):
        engine = make_engine(q_entry("Q1?"), q_entry("Q2?"))
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        outcome = engine.finish(graph)
        assert outcome.kind == "generation_trigger"
        assert graph.finished

    def test_finish_with_no_answers_rejected(self):
        engine = make_engine(q_entry("Q1?"))
        graph = engine.start_session("write")
        with pytest.raises(NothingToComposeError):
            engine.finish(graph)

    def test_pending_turn_recorded_as_skipped(self):
        engine = make_engine(q_entry("Q1?"), q_entry("Q2?"))
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        engine.finish(graph)
        assert graph.turns[1].status == "skipped"

    def test_submit_after_finish_rejected(self):
        engine = make_engine(q_entry("Q1?"), q_entry("Q2?"))
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        engine.finish(graph)
        with pytest.raises(NoActiveQuestionError):
            engine.submit_answer(graph, "too late")


class TestInvariantsAndDeterminism:
    def test_linearity_after_interleaved_actions(self):
        engine = make_engine(
            *[q_entry(f"Q{i}?") for i in range(1, 7)],
        )
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        engine.skip_question(graph)
        engine.submit_answer(graph, "a3")
        engine.navigate(graph, direction="previous")
        engine.navigate(graph, direction="next")
        engine.modify_answer(graph, 1, "changed")
        ids = [t.id for t in graph.turns]
        assert ids == sorted(ids)
        pending = [t for t in graph.turns if t.status == "pending"]
        assert len(pending) == 1 and graph.turns[-1] is pending[0]

    def test_replay_determinism(self):
        def run():
            engine = make_engine(
                *[q_entry(f"Q{i}?") for i in range(1, 5)], end_entry()
            )
            graph = engine.start_session("write")
            engine.submit_answer(graph, "a1")
            engine.skip_question(graph)
            engine.submit_answer(graph, "a3")
            engine.submit_answer(graph, "a4")
            return graph.to_dict()

        assert run() == run()

    def test_graph_serialization_round_trip(self):
        engine = make_engine(q_entry("Q1?"), q_entry("Q2?"))
        graph = engine.start_session("write")
        engine.submit_answer(graph, "a1")
        data = graph.to_dict()
        assert ConversationGraph.from_dict(json.loads(json.dumps(data))).to_dict() == data


class TestQuestionStats:
    def synthetic_set(self):
        # 25 graphs, 199 questions total, 175 answered, 24 skipped:
        # 24 graphs of 8 questions (7 answered, 1 skipped) + 1 graph of 7 answered
        graphs = []
        next_q = 0
        for g in range(24):
            turns = []
            for i in range(8):
                status = "skipped" if i == 7 else "answered"
                from stepflow.qa import QuestionTurn

                turns.append(
                    QuestionTurn(
                        id=i + 1,
                        question=f"question number {next_q + i}?",
                        answer="an answer" if status == "answered" else None,
                        status=status,
                    )
                )
            next_q += 8
            graphs.append(ConversationGraph(turns=turns, cursor=7, finished=True))
        from stepflow.qa import QuestionTurn

        turns = [
            QuestionTurn(id=i + 1, question=f"final graph q{i}?", answer="yes", status="answered")
            for i in range(7)
        ]
        graphs.append(ConversationGraph(turns=turns, cursor=6, finished=True))
        return graphs

    def test_write_task_means_match_synthetic_totals(self):
        stats = question_stats(self.synthetic_set())
        assert stats["mean_received"] == pytest.approx(199 / 25)
        assert stats["mean_received"] == pytest.approx(7.96)
        assert stats["answer_rate"] == pytest.approx(175 / 199)
        assert stats["answer_rate"] == pytest.approx(0.879, abs=0.001)

    def test_single_graph_all_answered(self):
        from stepflow.qa import QuestionTurn

        graph = ConversationGraph(
            turns=[
                QuestionTurn(id=1, question="a?", answer="x", status="answered"),
                QuestionTurn(id=2, question="b?", answer="y", status="answered"),
            ],
            cursor=1,
        )
        stats = question_stats([graph])
        assert stats["answer_rate"] == 1.0
        assert stats["mean_skipped"] == 0.0

    def test_word_means_match_hand_counts(self):
        from stepflow.qa import QuestionTurn

        questions = [
            "What is the occasion?",            # 4 words
            "Who exactly is coming along?",     # 5 words
            "When does it start?",              # 4 words
            "Where should everyone meet up?",   # 5 words
            "Why celebrate this weekend?",      # 4 words
        ]
        turns = [
            QuestionTurn(id=i + 1, question=q, answer="three word answer", status="answered")
            for i, q in enumerate(questions)
        ]
        stats = question_stats([ConversationGraph(turns=turns, cursor=4)])
        assert stats["mean_question_words"] == pytest.approx((4 + 5 + 4 + 5 + 4) / 5)
        assert stats["mean_answer_words"] == pytest.approx(3.0)

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            question_stats([])
