"""Difficulty rubric, model scoring, fitness orderings, hybrid selection."""

import dataclasses

import pytest

from conftest import FnModel, ScriptedModel

from planloop.concept import build_skeleton
from planloop.discriminators import (
    Candidate,
    GroundTruthOrdering,
    OverrideNotInCandidates,
    Ranking,
    SCORER_ROLE,
    ScoreParseError,
    UnsupportedCityCount,
    UnsupportedDuration,
    candidate_from_dict,
    ground_truth_ordering,
    hybrid_select,
    llm_rank,
    llm_score,
    llm_score_rounds,
    llm_score_table,
    ranking_from_dict,
    round_rankings,
    rubric_rank,
    rubric_score,
    score_query,
)
from planloop.fixtures import (
    REFUSAL_TEXT,
    demo_candidates,
    demo_flawed_plan,
    demo_good_plan,
    demo_queries,
    demo_sandbox,
)
from planloop.models import ModelClient, script_transcript
from planloop.planner import describe_query
from planloop.plans import Query, QueryFeatures, serialize_plan


def features(**kw):
    base = dict(
        duration_days=3,
        city_count=1,
        people=1,
        room_rule_count=0,
        cuisine_count=0,
        has_transportation_request=False,
    )
    base.update(kw)
    return QueryFeatures(**base)


# --- rubric -------------------------------------------------------------

def test_rubric_minimal_query_scores_zero():
    assert rubric_score(features()).total == 0


def test_rubric_maximal_hand_case():
    score = rubric_score(
        features(
            duration_days=7,
            city_count=3,
            people=5,
            room_rule_count=2,
            cuisine_count=3,
            has_transportation_request=True,
        ),
        query_id="qmax",
    )
    assert (score.day_points, score.city_points, score.people_points) == (2, 2, 4)
    assert (score.room_rule_points, score.cuisine_points, score.transportation_points) == (2, 3, 1)
    assert score.total == 14
    assert score.to_dict()["total"] == 14


def test_rubric_component_scales():
    assert rubric_score(features(duration_days=5)).total == 1
    assert rubric_score(features(city_count=2)).total == 1
    assert rubric_score(features(people=3)).total == 2
    assert rubric_score(features(room_rule_count=4)).total == 4
    assert rubric_score(features(cuisine_count=2)).total == 2
    assert rubric_score(features(has_transportation_request=True)).total == 1


def test_rubric_rejects_off_scale_inputs():
    with pytest.raises(UnsupportedDuration):
        rubric_score(features(duration_days=4))
    with pytest.raises(UnsupportedCityCount):
        rubric_score(features(city_count=4))


def test_score_query_on_demo_candidates():
    totals = {c.plan_id: score_query(c.query).total for c in demo_candidates()}
    assert totals == {"cand-a": 0, "cand-b": 2, "cand-c": 5}


def test_rubric_rank_orders_and_breaks_ties():
    ranking = rubric_rank(demo_candidates())
    assert ranking.method == "rubric"
    assert ranking.ordered_plan_ids == ("cand-c", "cand-b", "cand-a")
    assert ranking.scores == (5.0, 2.0, 0.0)

    easiest = rubric_rank(demo_candidates(), hardest_first=False)
    assert easiest.ordered_plan_ids == ("cand-a", "cand-b", "cand-c")

    # equal totals fall back to ascending plan id
    a, b, c = demo_candidates()
    clones = [
        dataclasses.replace(a, plan_id="z-plan"),
        dataclasses.replace(a, plan_id="a-plan"),
    ]
    assert rubric_rank(clones).ordered_plan_ids == ("a-plan", "z-plan")


def test_ranking_validation_and_round_trip():
    with pytest.raises(ValueError, match="one score"):
        Ranking("rubric", ("a", "b"), (1.0,))
    with pytest.raises(ValueError, match="distinct"):
        Ranking("rubric", ("a", "a"), (1.0, 1.0))
    ranking = rubric_rank(demo_candidates())
    assert ranking_from_dict(ranking.to_dict()) == ranking


def test_candidate_round_trip():
    for candidate in demo_candidates():
        assert candidate_from_dict(candidate.to_dict()) == candidate
    assert demo_candidates()[0].request_text == describe_query(demo_candidates()[0].query)


# --- model scoring ------------------------------------------------------

def test_llm_score_mean_and_retry():
    model = ScriptedModel(["88", "no score here", "I'd say 70.", "  12 ", "100."])
    score = llm_score(demo_good_plan(), "CODE", model, repeats=4)
    assert score == pytest.approx((88 + 70 + 12 + 100) / 4)
    assert len(model.prompts) == 5
    assert all(role == SCORER_ROLE for role, _ in model.prompts)
    assert "CODE" in model.prompts[0][1]
    assert "Day 1:" in model.prompts[0][1]


def test_llm_score_rejects_out_of_range_values():
    model = ScriptedModel(["150", "0", "42"])
    assert llm_score_rounds(demo_good_plan(), "CODE", model, repeats=1) == [42.0]
    assert len(model.prompts) == 3


def test_llm_score_parse_error_after_three_tries():
    model = ScriptedModel(["nope", "still nope", "none"])
    with pytest.raises(ScoreParseError):
        llm_score_rounds(demo_good_plan(), "CODE", model, repeats=1)


def test_llm_score_repeats_validation():
    with pytest.raises(ValueError, match=">= 1"):
        llm_score(demo_good_plan(), "CODE", ScriptedModel([]), repeats=0)


def test_llm_rank_with_replay_client():
    candidates = demo_candidates()
    # all demo candidate plans share one body, so one prompt digest counts up
    replies = ["10", "20", "90", "80", "30", "40"]  # 3 candidates x 2 repeats
    calls = []
    first_prompt = None
    from planloop.discriminators import _score_prompt

    for candidate in candidates:
        prompt = _score_prompt(candidate.plan, "CODE")
        first_prompt = first_prompt or prompt
        calls.extend((SCORER_ROLE, prompt, replies[len(calls)]) for _ in range(2))
    client = ModelClient(mode="replay", transcript=script_transcript(calls))
    ranking = llm_rank(candidates, "CODE", client, repeats=2)
    assert ranking.method == "llm"
    # averages: cand-a 15, cand-b 85, cand-c 35
    assert ranking.ordered_plan_ids == ("cand-b", "cand-c", "cand-a")
    assert ranking.scores == (85.0, 35.0, 15.0)
    assert client.stats["calls"] == 6


def test_llm_rank_needs_two_candidates():
    with pytest.raises(ValueError, match="two"):
        llm_rank(demo_candidates()[:1], "CODE", ScriptedModel([]))


def test_llm_score_table_and_round_rankings():
    model = ScriptedModel(["10", "30", "20", "20"])
    table = llm_score_table(demo_candidates()[:2], "CODE", model, repeats=2)
    assert table == {"cand-a": [10.0, 30.0], "cand-b": [20.0, 20.0]}
    rounds = round_rankings(table)
    assert rounds == [["cand-b", "cand-a"], ["cand-a", "cand-b"]]


def test_round_rankings_tie_and_shape_checks():
    assert round_rankings({"b": [10.0], "a": [10.0]}) == [["a", "b"]]
    with pytest.raises(ValueError, match="same number"):
        round_rankings({"a": [1.0, 2.0], "b": [1.0]})


# --- fitness ordering ---------------------------------------------------

def make_fitness_setup():
    sandbox = demo_sandbox()
    q1, q2 = demo_queries()
    skeleton = build_skeleton(sandbox)
    good_text = serialize_plan(demo_good_plan())
    flawed_text = serialize_plan(demo_flawed_plan())
    candidates = [
        Candidate("cand-good", demo_good_plan(), q1),
        Candidate("cand-flawed", demo_flawed_plan(), q1),
    ]

    def respond(role, prompt):
        teaches_flaws = flawed_text in prompt
        asks_q2 = describe_query(q2) in prompt
        if not teaches_flaws:
            return good_text
        return REFUSAL_TEXT if asks_q2 else flawed_text

    return sandbox, (q1, q2), skeleton, candidates, FnModel(respond)


def test_ground_truth_ordering_full_protocol():
    sandbox, queries, skeleton, candidates, model = make_fitness_setup()
    ordering = ground_truth_ordering(
        candidates, skeleton, list(queries), sandbox, model, runs=2
    )
    assert isinstance(ordering, GroundTruthOrdering)
    assert model.calls == len(candidates) * 2 * len(queries)
    assert ordering.ordered_plan_ids == ("cand-good", "cand-flawed")
    assert ordering.worst_plan_id == "cand-flawed"
    by_id = {e.plan_id: e for e in ordering.entries}
    # good example: every query answered, all commonsense checks pass
    assert by_id["cand-good"].per_run == (1.0, 1.0)
    # flawed example: q1 passes 6 of 8, q2 becomes a refusal
    assert by_id["cand-flawed"].per_run == (0.75, 0.75)
    assert by_id["cand-flawed"].average == 0.75
    payload = ordering.to_dict()
    assert payload["metric"] == "commonsense-micro"
    assert payload["runs"] == 2
    assert [e["plan_id"] for e in payload["entries"]] == ["cand-good", "cand-flawed"]


def test_ground_truth_ordering_final_metric():
    sandbox, queries, skeleton, candidates, model = make_fitness_setup()
    ordering = ground_truth_ordering(
        candidates, skeleton, list(queries), sandbox, model, runs=1, metric="final"
    )
    by_id = {e.plan_id: e for e in ordering.entries}
    assert by_id["cand-good"].per_run == (1.0,)
    assert by_id["cand-flawed"].per_run == (0.0,)


def test_ground_truth_ordering_validation():
    sandbox, queries, skeleton, candidates, model = make_fitness_setup()
    with pytest.raises(ValueError, match="no candidates"):
        ground_truth_ordering([], skeleton, list(queries), sandbox, model)
    with pytest.raises(ValueError, match="runs"):
        ground_truth_ordering(candidates, skeleton, list(queries), sandbox, model, runs=0)
    with pytest.raises(ValueError, match="metric"):
        ground_truth_ordering(
            candidates, skeleton, list(queries), sandbox, model, metric="vibes"
        )


# --- hybrid selection ---------------------------------------------------

def rk(*ids):
    return Ranking("rubric", tuple(ids), tuple(float(len(ids) - i) for i in range(len(ids))))


def test_hybrid_select_borda():
    assert hybrid_select([rk("a", "b", "c"), rk("a", "c", "b")]) == "a"
    # a and b tie on points; the lexically smaller id wins
    assert hybrid_select([rk("a", "b", "c"), rk("b", "a", "c")]) == "a"


def test_hybrid_select_override():
    rankings = [rk("a", "b", "c")]
    assert hybrid_select(rankings, human_override="c") == "c"
    with pytest.raises(OverrideNotInCandidates):
        hybrid_select(rankings, human_override="z")
    with pytest.raises(ValueError, match="no rankings"):
        hybrid_select([])
