"""A small handcrafted world for tests, demos, and offline replay.

Two cities, one flight each way, two lodgings, three restaurants, two
attractions. Costs are round numbers so every expected total can be checked
by hand. `write_loop_fixture` lays down everything a replayed optimization
run needs: sandbox, queries, candidates, skeleton, and a transcript whose
call tags line up with the loop's exact call order.
"""

from __future__ import annotations

import json
from pathlib import Path

from .concept import SkeletonPrompt, build_skeleton
from .discriminators import Candidate, hybrid_select, rubric_rank
from .models import Transcript, script_transcript
from .planner import PLANNER_ROLE, build_planner_prompt
from .plans import DayEntry, Plan, Query, TransportLeg, save_queries, serialize_plan
from .sandbox import (
    AccommodationRecord,
    AttractionRecord,
    FlightRecord,
    GroundRouteRecord,
    RestaurantRecord,
    Sandbox,
    export_csv_tables,
    write_reference_archive,
)

ORIGIN = "Avalon"
DESTINATION = "Bramblewick"


def demo_sandbox() -> Sandbox:
    return Sandbox(
        flights=(
            FlightRecord("FL100", ORIGIN, DESTINATION, "08:00", "09:30", "2026-03-01", 100.0),
            FlightRecord("FL101", DESTINATION, ORIGIN, "18:00", "19:30", "2026-03-03", 100.0),
        ),
        accommodations=(
            AccommodationRecord("Harbor Inn", DESTINATION, 50.0, "private room", frozenset(), 1, 2),
            AccommodationRecord(
                "Garden Lodge",
                DESTINATION,
                80.0,
                "entire room",
                frozenset({"no-pets", "no-parties"}),
                2,
                4,
            ),
        ),
        restaurants=(
            RestaurantRecord("Copper Kettle", DESTINATION, frozenset({"american"}), 10.0),
            RestaurantRecord("Juniper Table", DESTINATION, frozenset({"french", "italian"}), 10.0),
            RestaurantRecord("Old Mill Cafe", DESTINATION, frozenset({"chinese"}), 10.0),
        ),
        attractions=(
            AttractionRecord("Harbor Lights Museum", DESTINATION),
            AttractionRecord("Old Mill Park", DESTINATION),
        ),
        distances=(
            GroundRouteRecord(ORIGIN, DESTINATION, 120.0, 40.0, 60.0, 110.0),
            GroundRouteRecord(DESTINATION, ORIGIN, 120.0, 40.0, 60.0, 110.0),
        ),
    )


def demo_queries() -> list[Query]:
    """The validation split used by demos and replayed runs."""
    return [
        Query(
            id="q1",
            origin_city=ORIGIN,
            duration_days=3,
            people=2,
            budget=800.0,
            raw_text=(
                "We are two travelers leaving Avalon for a 3-day visit to "
                "Bramblewick with 800 to spend."
            ),
            destinations=(DESTINATION,),
        ),
        Query(
            id="q2",
            origin_city=ORIGIN,
            duration_days=3,
            people=1,
            budget=400.0,
            raw_text=(
                "One traveler, three days in Bramblewick from Avalon, 400 "
                "budget, and at least one italian meal."
            ),
            destinations=(DESTINATION,),
            cuisines=frozenset({"italian"}),
        ),
    ]


def _three_day_plan(
    query_id: str,
    dinners: tuple[str, str, str],
    attractions: tuple[str | None, str | None],
    hotel: str,
) -> Plan:
    """3 days out of Avalon: fly to Bramblewick, one full day there, fly home."""

    def dinner(name: str) -> tuple[str, str]:
        return (name, DESTINATION)

    def sights(name: str | None) -> tuple[tuple[str, str], ...]:
        return ((name, DESTINATION),) if name else ()

    return Plan(
        query_id=query_id,
        days=(
            DayEntry(
                day_index=1,
                transition=(ORIGIN, DESTINATION),
                transportation=TransportLeg("flight", ORIGIN, DESTINATION, "FL100"),
                dinner=dinner(dinners[0]),
                attractions=sights(attractions[0]),
                accommodation=(hotel, DESTINATION),
            ),
            DayEntry(
                day_index=2,
                city=DESTINATION,
                dinner=dinner(dinners[1]),
                attractions=sights(attractions[1]),
                accommodation=(hotel, DESTINATION),
            ),
            DayEntry(
                day_index=3,
                transition=(DESTINATION, ORIGIN),
                transportation=TransportLeg("flight", DESTINATION, ORIGIN, "FL101"),
                dinner=dinner(dinners[2]),
            ),
        ),
    )


def demo_good_plan(query_id: str = "q1") -> Plan:
    """Passes all thirteen checks for q1: cost 560 against an 800 budget."""
    return _three_day_plan(
        query_id,
        dinners=("Copper Kettle", "Juniper Table", "Old Mill Cafe"),
        attractions=("Harbor Lights Museum", "Old Mill Park"),
        hotel="Harbor Inn",
    )


def demo_flawed_plan(query_id: str = "q1") -> Plan:
    """Repeats a restaurant and an attraction, so for q1 exactly the two
    diversity checks fail."""
    return _three_day_plan(
        query_id,
        dinners=("Copper Kettle", "Copper Kettle", "Old Mill Cafe"),
        attractions=("Old Mill Park", "Old Mill Park"),
        hotel="Harbor Inn",
    )


def demo_candidates() -> list[Candidate]:
    """Three worked examples answering training queries of rising difficulty."""
    qt1 = Query(
        id="qt1",
        origin_city=ORIGIN,
        duration_days=3,
        people=1,
        budget=400.0,
        raw_text="A quiet solo trip from Avalon to Bramblewick over three days, 400 budget.",
        destinations=(DESTINATION,),
    )
    qt2 = Query(
        id="qt2",
        origin_city=ORIGIN,
        duration_days=3,
        people=2,
        budget=700.0,
        raw_text="Two of us, three days in Bramblewick, 700 to spend, keen on italian food.",
        destinations=(DESTINATION,),
        cuisines=frozenset({"italian"}),
    )
    qt3 = Query(
        id="qt3",
        origin_city=ORIGIN,
        duration_days=3,
        people=2,
        budget=900.0,
        raw_text=(
            "Two travelers with a dog, three days in Bramblewick on 900. "
            "Private rooms, american and chinese meals, and no self-driving."
        ),
        destinations=(DESTINATION,),
        room_rules=frozenset({"pets"}),
        room_type="private room",
        cuisines=frozenset({"american", "chinese"}),
        transportation_request="no-self-driving",
    )
    shared = dict(
        dinners=("Copper Kettle", "Juniper Table", "Old Mill Cafe"),
        attractions=("Harbor Lights Museum", "Old Mill Park"),
        hotel="Harbor Inn",
    )
    return [
        Candidate("cand-a", _three_day_plan("qt1", **shared), qt1),
        Candidate("cand-b", _three_day_plan("qt2", **shared), qt2),
        Candidate("cand-c", _three_day_plan("qt3", **shared), qt3),
    ]


def demo_skeleton() -> SkeletonPrompt:
    return build_skeleton(demo_sandbox())


REFUSAL_TEXT = "I am sorry, this trip cannot be arranged."


def build_loop_transcript(max_iterations: int = 2) -> Transcript:
    """Script every model call a rubric-mode replay of the demo run makes.

    Iteration 1 plans q1 well and fumbles q2; the rubric then picks the
    hardest candidate, its example joins the prompt, and iteration 2 repeats
    the pattern with the grown prompt. Selection is computed here with the
    same ranking calls the loop uses, so the tags stay aligned.
    """
    skeleton = demo_skeleton()
    queries = demo_queries()
    pool = list(demo_candidates())
    calls: list[tuple[str, str, str]] = []
    for _ in range(max_iterations):
        prompt_text = skeleton.render()
        calls.append((PLANNER_ROLE, build_planner_prompt(prompt_text, queries[0]),
                      serialize_plan(demo_good_plan("q1"))))
        calls.append((PLANNER_ROLE, build_planner_prompt(prompt_text, queries[1]),
                      REFUSAL_TEXT))
        if not pool:
            break
        selected_id = hybrid_select([rubric_rank(pool)])
        selected = next(c for c in pool if c.plan_id == selected_id)
        pool.remove(selected)
        skeleton = skeleton.with_example(selected.request_text, selected.plan_text)
    return script_transcript(calls)


def write_loop_fixture(directory: str | Path, max_iterations: int = 2) -> dict[str, Path]:
    """Write every input a replayed demo run needs; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sandbox = demo_sandbox()
    paths: dict[str, Path] = {}
    paths["archive"] = write_reference_archive(sandbox, directory / "archive.json")
    csv_dir = directory / "csv"
    export_csv_tables(sandbox, csv_dir)
    paths["csv_dir"] = csv_dir
    paths["queries"] = save_queries(demo_queries(), directory / "queries.ndjson")
    candidates_path = directory / "candidates.json"
    candidates_path.write_text(
        json.dumps([c.to_dict() for c in demo_candidates()], indent=2) + "\n",
        encoding="utf-8",
    )
    paths["candidates"] = candidates_path
    paths["skeleton"] = demo_skeleton().save(directory / "skeleton.json")
    paths["transcript"] = build_loop_transcript(max_iterations).save(
        directory / "transcript.ndjson"
    )
    return paths
