"""Driving the planner model: prompt assembly, generation, evaluation."""

from __future__ import annotations

from typing import Literal, Sequence

from .constraints import EvaluationReport, evaluate
from .models import ModelClient, ModelError
from .plans import ParseError, Plan, Query, parse_plan
from .sandbox import Sandbox

PLANNER_ROLE = "planner"


def describe_query(query: Query) -> str:
    """The trip request as prose; used when a query has no raw text."""
    if query.raw_text:
        return query.raw_text
    if query.destinations:
        place = "visiting " + ", ".join(query.destinations)
    else:
        place = f"visiting {query.required_city_count} cities in {query.region}"
    parts = [
        f"A {query.duration_days}-day trip from {query.origin_city} for "
        f"{query.people} {'person' if query.people == 1 else 'people'}, "
        f"{place}, with a budget of {query.budget:g}."
    ]
    if query.room_rules:
        parts.append(
            "Accommodations must allow " + ", ".join(sorted(query.room_rules)) + "."
        )
    if query.room_type is not None:
        parts.append(f"Every room must be a {query.room_type}.")
    if query.cuisines:
        parts.append("Meals should cover " + ", ".join(sorted(query.cuisines)) + " cuisine.")
    if query.transportation_request == "no-self-driving":
        parts.append("The party will not drive.")
    elif query.transportation_request == "no-flights":
        parts.append("The party will not fly.")
    return " ".join(parts)


def build_planner_prompt(prompt_text: str, query: Query) -> str:
    return f"{prompt_text.rstrip()}\n\nTrip request:\n{describe_query(query)}\n\nItinerary:\n"


def generate_plan(prompt_text: str, query: Query, model: ModelClient) -> Plan | None:
    """One planner call; text that fails the grammar is a non-delivery."""
    text = model.complete(PLANNER_ROLE, build_planner_prompt(prompt_text, query))
    try:
        return parse_plan(text, query_id=query.id)
    except ParseError:
        return None


def generate_reports(
    prompt_text: str,
    queries: Sequence[Query],
    sandbox: Sandbox,
    model: ModelClient,
    model_errors: Literal["raise", "undelivered"] = "raise",
) -> list[EvaluationReport]:
    """Generate and evaluate one plan per query.

    Transport failures either propagate ("raise") or downgrade the query to
    a non-delivery ("undelivered"); malformed plan text is always the
    latter.
    """
    reports = []
    for query in queries:
        try:
            plan = generate_plan(prompt_text, query, model)
        except ModelError:
            if model_errors != "undelivered":
                raise
            plan = None
        reports.append(evaluate(plan, query, sandbox))
    return reports
