"""Acceptance gate: one test per shipped guarantee, each printing a verdict.

Run with `pytest tests/test_acceptance.py -v` to get one pass/fail line per
criterion.
"""

import itertools
import random
import time

import pytest

from conftest import FnModel, ScriptedModel

from planloop.cli import main as cli_main
from planloop.constraints import (
    COMMONSENSE_IDS,
    HARD_IDS,
    ConstraintOutcome,
    EvaluationReport,
    evaluate,
)
from planloop.discriminators import (
    Candidate,
    ground_truth_ordering,
    llm_score,
    round_rankings,
)
from planloop.fixtures import (
    REFUSAL_TEXT,
    demo_flawed_plan,
    demo_good_plan,
    demo_queries,
    demo_sandbox,
    demo_skeleton,
    write_loop_fixture,
)
from planloop.loop import RunStore, replay_run
from planloop.metrics import (
    BatchMetrics,
    batch_metrics,
    r_squared,
    relative_improvement,
    worst_plan_avoidance,
)
from planloop.oracle import (
    enumerate_candidates,
    estimate_candidate_space,
    independent_recheck,
)
from planloop.plans import Query, QueryFeatures, parse_plan, serialize_plan
from planloop.sandbox import (
    CATEGORIES,
    export_csv_tables,
    ingest_csv_tables,
    ingest_reference_archive,
    synthesize_sandbox,
    write_reference_archive,
)

from planloop.discriminators import rubric_score

from test_plans import random_plan


def verdict(criterion, summary):
    print(f"ACCEPTANCE {criterion}: PASS — {summary}")


# --- criterion 1: difficulty rubric -----------------------------------------

def test_criterion_1_difficulty_rubric():
    start = time.monotonic()

    minimal = QueryFeatures(3, 1, 1, 0, 0, False)
    assert rubric_score(minimal).total == 0

    maximal = QueryFeatures(7, 3, 5, 2, 3, True)
    assert rubric_score(maximal).total == 14

    durations = (3, 5, 7)
    cities = (1, 2, 3)
    people = tuple(range(1, 9))
    rules = tuple(range(6))
    cuisines = tuple(range(6))
    transport = (False, True)
    grid = list(itertools.product(durations, cities, people, rules, cuisines, transport))
    assert len(grid) == 5184

    totals = {}
    for case in grid:
        d, c, p, r, k, t = case
        totals[case] = rubric_score(QueryFeatures(d, c, p, r, k, t)).total

    def bumped(case, dim):
        scales = (durations, cities, people, rules, cuisines, transport)
        values = scales[dim]
        position = values.index(case[dim])
        if position + 1 == len(values):
            return None
        out = list(case)
        out[dim] = values[position + 1]
        return tuple(out)

    violations = 0
    for case in grid:
        for dim in range(6):
            harder = bumped(case, dim)
            if harder is not None and totals[harder] < totals[case]:
                violations += 1
    assert violations == 0

    elapsed = time.monotonic() - start
    assert elapsed < 1.0, f"rubric sweep took {elapsed:.2f}s"
    verdict(
        "criterion-1 (difficulty rubric)",
        f"0 and 14 endpoints exact; monotone over {len(grid)} cases in {elapsed:.2f}s",
    )


# --- criterion 2: relative improvement ---------------------------------------

def test_criterion_2_relative_improvement():
    first = relative_improvement(5.55, 7.78)
    second = relative_improvement(5.55, 6.11)
    assert first == pytest.approx(40.18, abs=0.05)
    assert second == pytest.approx(10.09, abs=0.05)
    verdict(
        "criterion-2 (relative improvement)",
        f"5.55->7.78 = {first:.2f}%, 5.55->6.11 = {second:.2f}% within ±0.05",
    )


# --- criterion 3: batch metric invariants -------------------------------

def random_report(rng, query_id, hard_mask):
    if rng.random() < 0.15:
        return EvaluationReport(query_id=query_id, delivered=False, outcomes=(), total_cost=None)
    outcomes = []
    for cid in COMMONSENSE_IDS:
        outcomes.append(ConstraintOutcome(cid, "pass" if rng.random() < 0.8 else "fail", ""))
    for cid, applicable in zip(HARD_IDS, hard_mask):
        if not applicable:
            outcomes.append(ConstraintOutcome(cid, "not-applicable", ""))
        else:
            outcomes.append(ConstraintOutcome(cid, "pass" if rng.random() < 0.8 else "fail", ""))
    return EvaluationReport(
        query_id=query_id, delivered=True, outcomes=tuple(outcomes), total_cost=1.0
    )


def test_criterion_3_metric_invariants():
    rng = random.Random(3141)
    batches = 0
    equal_applicable_checks = 0
    for b in range(1000):
        shared_mask = b % 2 == 0
        mask = tuple(rng.random() < 0.5 for _ in HARD_IDS)
        reports = []
        for i in range(rng.randrange(1, 20)):
            row_mask = mask if shared_mask else tuple(rng.random() < 0.5 for _ in HARD_IDS)
            reports.append(random_report(rng, f"q{i}", row_mask))
        metrics = batch_metrics(reports)  # construction enforces the invariants
        assert metrics.final_rate <= min(metrics.commonsense_macro, metrics.hard_macro) + 1e-9
        assert metrics.commonsense_macro <= metrics.delivery_rate + 1e-9
        assert metrics.hard_macro <= metrics.delivery_rate + 1e-9
        # commonsense applicability is uniform by definition
        assert metrics.commonsense_micro >= metrics.commonsense_macro - 1e-9
        if shared_mask and any(mask):
            # micro >= macro needs at least one applicable check per report;
            # with zero applicable, micro is 0/0 -> 0.0 while macro is vacuous
            assert metrics.hard_micro >= metrics.hard_macro - 1e-9
            equal_applicable_checks += 1
        batches += 1
    assert batches == 1000

    # the published comparison rows construct cleanly under the same checks
    for row in (
        (1.0, 0.8007, 0.1778, 0.5023, 0.2833, 0.0555),
        (1.0, 0.8493, 0.2722, 0.6119, 0.4278, 0.1278),
        (1.0, 0.8139, 0.1556, 0.3714, 0.2222, 0.0278),
        (1.0, 0.6792, 0.1667, 0.1429, 0.1333, 0.0611),
        (1.0, 0.7069, 0.1111, 0.2405, 0.1311, 0.0778),
    ):
        BatchMetrics(*row)

    verdict(
        "criterion-3 (metric invariants)",
        f"{batches} random batches clean; micro>=macro held in "
        f"{equal_applicable_checks} equal-applicability batches; reference rows construct",
    )


# --- criterion 4: oracle equivalence ------------------------------------

def test_criterion_4_oracle_equivalence():
    start = time.monotonic()
    # one flight pair, two hotels, three restaurants, two attractions:
    # 2,592 structurally complete candidates per query
    profile = {"flights": 2, "accommodations": 2, "restaurants": 3,
               "attractions": 2, "distances": 2}
    sandbox = synthesize_sandbox(18, profile)
    cuisine = sorted(sandbox.restaurants[0].cuisines)[0]
    queries = [
        Query(id="qa", origin_city="Avalon", duration_days=3, people=2,
              budget=1300.0, destinations=("Bramblewick",)),
        Query(id="qb", origin_city="Avalon", duration_days=3, people=4,
              budget=1600.0, destinations=("Bramblewick",),
              room_rules=frozenset({"pets"}), room_type="entire room",
              cuisines=frozenset({cuisine}),
              transportation_request="no-self-driving"),
    ]

    compared = 0
    disagreements = []
    statuses_seen = set()
    for query in queries:
        estimate = estimate_candidate_space(query, sandbox)
        assert estimate <= 5000, f"search space {estimate} too large for the gate"
        count = 0
        for plan in enumerate_candidates(query, sandbox, limit=5000):
            count += 1
            engine = {o.constraint_id: o.status for o in evaluate(plan, query, sandbox).outcomes}
            oracle = independent_recheck(plan, query, sandbox)
            if engine != oracle:
                disagreements.append((query.id, plan))
            for cid, status in engine.items():
                statuses_seen.add((query.id, cid, status))
        assert count == estimate
        compared += count

    assert disagreements == [], f"{len(disagreements)} of {compared} disagree"
    # both verdicts appear for every stated hard requirement on qb
    for cid in HARD_IDS:
        assert ("qb", cid, "pass") in statuses_seen
        assert ("qb", cid, "fail") in statuses_seen

    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"equivalence sweep took {elapsed:.1f}s"
    verdict(
        "criterion-4 (oracle equivalence)",
        f"engine and independent recheck agree on all {compared} candidates "
        f"in {elapsed:.1f}s",
    )


# --- criterion 5: discriminator protocols -------------------------------

def test_criterion_5_discriminator_protocols():
    # scripted scoring: the average is exact
    replies = ["73", "12", "99", "1", "100", "55", "40", "88", "64", "27"]
    model = ScriptedModel(list(replies))
    score = llm_score(demo_good_plan(), "CODE", model, repeats=10)
    assert abs(score - 55.9) < 1e-9
    assert len(model.prompts) == 10

    # repeat-ranking stability: the known-worst plan never tops a round
    table = {
        "cand-mid": [50.0 + r for r in range(10)],
        "cand-top": [80.0 + r for r in range(10)],
        "cand-worst": [5.0 + r for r in range(10)],
    }
    rounds = round_rankings(table)
    avoided, total = worst_plan_avoidance(rounds, "cand-worst")
    assert (avoided, total) == (10, 10)

    # fitness ordering: exactly candidates x runs x queries calls, sorted by
    # each candidate's own average
    sandbox = demo_sandbox()
    q1, q2 = demo_queries()
    skeleton = demo_skeleton()
    candidates = [Candidate(f"cand-{k:02d}", demo_good_plan(), q1) for k in range(10)]
    good_text = serialize_plan(demo_good_plan())
    flawed_text = serialize_plan(demo_flawed_plan())
    runs, n_queries = 3, 2

    # script: run r of candidate k answers with fixed pattern (k + r) % 4
    pattern_replies = {
        0: (REFUSAL_TEXT, REFUSAL_TEXT),
        1: (flawed_text, REFUSAL_TEXT),
        2: (good_text, flawed_text),
        3: (good_text, good_text),
    }

    # independent expectation: evaluate each scripted reply directly and pool
    def pattern_value(pattern):
        reports = []
        for query, text in zip((q1, q2), pattern_replies[pattern]):
            if text == REFUSAL_TEXT:
                reports.append(EvaluationReport(
                    query_id=query.id, delivered=False, outcomes=(), total_cost=None,
                ))
            else:
                reports.append(evaluate(parse_plan(text, query_id=query.id), query, sandbox))
        return batch_metrics(reports).commonsense_micro

    value = {p: pattern_value(p) for p in range(4)}
    assert len(set(value.values())) >= 3, "patterns must separate candidates"

    counter = {"calls": 0}

    def respond(role, prompt):
        call = counter["calls"]
        counter["calls"] += 1
        k = call // (runs * n_queries)
        r = (call % (runs * n_queries)) // n_queries
        q = call % n_queries
        return pattern_replies[(k + r) % 4][q]

    ordering = ground_truth_ordering(
        candidates, skeleton, [q1, q2], sandbox, FnModel(respond), runs=runs
    )
    assert counter["calls"] == len(candidates) * runs * n_queries == 60

    expected_per_run = {
        f"cand-{k:02d}": tuple(value[(k + r) % 4] for r in range(runs)) for k in range(10)
    }
    by_id = {e.plan_id: e for e in ordering.entries}
    for plan_id, per_run in expected_per_run.items():
        assert by_id[plan_id].per_run == pytest.approx(per_run, abs=1e-12)
        assert by_id[plan_id].average == pytest.approx(sum(per_run) / runs, abs=1e-12)

    expected_order = sorted(
        expected_per_run,
        key=lambda pid: (-(sum(expected_per_run[pid]) / runs), pid),
    )
    assert list(ordering.ordered_plan_ids) == expected_order
    assert ordering.worst_plan_id == expected_order[-1]

    verdict(
        "criterion-5 (discriminator protocols)",
        "scripted mean exact, worst-plan avoidance 10/10, "
        "fitness ordering used 60 calls and sorts by its own averages",
    )


# --- criterion 6: regression fit ------------------------------------------

def test_criterion_6_regression_fit():
    assert abs(r_squared((1, 2, 3), (2, 4, 6)) - 1.0) < 1e-9
    assert abs(r_squared((0, 1, 2, 3), (5, 2, 2, 5)) - 0.0) < 1e-9
    assert abs(r_squared((1, 2, 3), (1, 2, 2)) - 0.75) < 1e-9

    xs, ys = (0.1, 0.4, 0.2, 0.9), (3.0, 1.0, 4.0, 1.5)
    base = r_squared(xs, ys)
    transformed = r_squared([5 * x - 2 for x in xs], [0.5 * y + 7 for y in ys])
    assert abs(base - transformed) < 1e-9

    verdict(
        "criterion-6 (regression fit)",
        "collinear=1.0, flat=0.0, frozen case=0.75, affine-invariant, all within 1e-9",
    )


# --- criterion 7: round trips -------------------------------------------

def test_criterion_7_round_trips(tmp_path):
    profile = {"flights": 3, "accommodations": 3, "restaurants": 4,
               "attractions": 3, "distances": 4}
    for label, sandbox in (
        ("synthesized", synthesize_sandbox(21, profile)),
        ("demo", demo_sandbox()),
    ):
        archive = write_reference_archive(sandbox, tmp_path / f"{label}.json")
        from_archive = ingest_reference_archive(archive)
        csv_dir = tmp_path / f"{label}-csv"
        export_csv_tables(from_archive, csv_dir, include_empty=True)
        from_csv = ingest_csv_tables(csv_dir)
        for category in CATEGORIES:
            assert from_csv.table(category) == sandbox.table(category), (
                f"{label}/{category} not record-identical"
            )

    rng = random.Random(987654)
    trips = 0
    for _ in range(100):
        plan = random_plan(rng)
        text = serialize_plan(plan)
        assert parse_plan(text, query_id=plan.query_id) == plan
        assert serialize_plan(parse_plan(text, query_id=plan.query_id)) == text
        trips += 1
    assert trips == 100

    verdict(
        "criterion-7 (round trips)",
        "archive->sandbox->CSV->sandbox record-identical for 2 sandboxes; "
        "100 random plans round-trip byte-stable",
    )


# --- criterion 8: replayed optimization run ----------------------------------

def test_criterion_8_replayed_run(tmp_path, capsys):
    start = time.monotonic()
    inputs = write_loop_fixture(tmp_path / "inputs")

    def launch(root, run_id, threshold):
        code = cli_main([
            "run-loop",
            "--sandbox", str(inputs["archive"]),
            "--queries", str(inputs["queries"]),
            "--candidates", str(inputs["candidates"]),
            "--skeleton", str(inputs["skeleton"]),
            "--store", str(root),
            "--run-id", run_id,
            "--max-iterations", "2",
            "--threshold", str(threshold),
            "--stub-transcript", str(inputs["transcript"]),
        ])
        assert code == 0
        return RunStore(root, run_id)

    store_a = launch(tmp_path / "a", "gate", 1.0)
    store_b = launch(tmp_path / "b", "gate", 1.0)
    capsys.readouterr()

    bytes_a = store_a.ndjson_path.read_bytes()
    bytes_b = store_b.ndjson_path.read_bytes()
    assert bytes_a == bytes_b and len(bytes_a) > 0, "reruns differ byte-for-byte"

    records = store_a.iterations()
    assert len(records) == 2
    for record in records:
        assert record.selected_plan_id is not None
        assert record.selected_example is not None  # exactly one example added
    assert records[-1].stop_reason == "max-iterations"
    replayed = replay_run(store_a)  # digest chain verifies
    assert len(replayed.final_skeleton.examples) == 2

    store_c = launch(tmp_path / "c", "gate", 0.0)
    capsys.readouterr()
    immediate = store_c.iterations()
    assert len(immediate) == 1
    assert immediate[0].stop_reason == "threshold-met"
    assert immediate[0].selected_plan_id is None

    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"replayed runs took {elapsed:.1f}s"
    verdict(
        "criterion-8 (replayed optimization run)",
        f"2-iteration run byte-identical across reruns, threshold 0 stops "
        f"immediately, finished in {elapsed:.1f}s",
    )
