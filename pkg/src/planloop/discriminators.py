"""Ranking candidate examples: difficulty rubric, model scoring, fitness
orderings measured against a validation split, and hybrid selection."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .concept import SkeletonPrompt
from .metrics import batch_metrics
from .models import ModelClient
from .plans import Plan, Query, QueryFeatures, extract_features, serialize_plan
from .planner import describe_query, generate_reports
from .sandbox import Sandbox

SCORER_ROLE = "scorer"

DAY_POINTS = {3: 0, 5: 1, 7: 2}
CITY_POINTS = {1: 0, 2: 1, 3: 2}

ORDERING_METRICS = ("commonsense-micro", "commonsense-macro", "final")


class UnsupportedDuration(ValueError):
    """Trip length outside the rubric's 3/5/7-day scale."""


class UnsupportedCityCount(ValueError):
    """City count outside the rubric's 1/2/3-city scale."""


class ScoreParseError(ValueError):
    """The scoring model never produced a usable 1-100 value."""


class OverrideNotInCandidates(ValueError):
    """A human override named a plan outside the ranked candidate set."""


@dataclass(frozen=True)
class Candidate:
    """One worked example under consideration: a plan paired with the query
    it answers."""

    plan_id: str
    plan: Plan
    query: Query

    @property
    def request_text(self) -> str:
        return describe_query(self.query)

    @property
    def plan_text(self) -> str:
        return serialize_plan(self.plan)

    def to_dict(self) -> dict:
        from .plans import query_to_dict

        return {
            "plan_id": self.plan_id,
            "plan_text": self.plan_text,
            "query": query_to_dict(self.query),
        }


def candidate_from_dict(raw: Mapping) -> Candidate:
    from .plans import parse_plan, query_from_dict

    query = query_from_dict(raw["query"])
    return Candidate(
        plan_id=raw["plan_id"],
        plan=parse_plan(raw["plan_text"], query_id=query.id),
        query=query,
    )


# --- difficulty rubric ------------------------------------------------------

@dataclass(frozen=True)
class DifficultyScore:
    query_id: str
    day_points: int
    city_points: int
    people_points: int
    room_rule_points: int
    cuisine_points: int
    transportation_points: int

    @property
    def total(self) -> int:
        return (
            self.day_points
            + self.city_points
            + self.people_points
            + self.room_rule_points
            + self.cuisine_points
            + self.transportation_points
        )

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "day_points": self.day_points,
            "city_points": self.city_points,
            "people_points": self.people_points,
            "room_rule_points": self.room_rule_points,
            "cuisine_points": self.cuisine_points,
            "transportation_points": self.transportation_points,
            "total": self.total,
        }


def rubric_score(features: QueryFeatures, query_id: str = "") -> DifficultyScore:
    """Score a query's difficulty: longer trips, more cities, bigger parties,
    and each stated requirement all add points, equally weighted."""
    if features.duration_days not in DAY_POINTS:
        raise UnsupportedDuration(f"{features.duration_days} days is off the rubric scale")
    if features.city_count not in CITY_POINTS:
        raise UnsupportedCityCount(f"{features.city_count} cities is off the rubric scale")
    return DifficultyScore(
        query_id=query_id,
        day_points=DAY_POINTS[features.duration_days],
        city_points=CITY_POINTS[features.city_count],
        people_points=max(features.people - 1, 0),
        room_rule_points=features.room_rule_count,
        cuisine_points=features.cuisine_count,
        transportation_points=1 if features.has_transportation_request else 0,
    )


def score_query(query: Query) -> DifficultyScore:
    return rubric_score(extract_features(query), query_id=query.id)


# --- rankings ---------------------------------------------------------------

@dataclass(frozen=True)
class Ranking:
    method: str
    ordered_plan_ids: tuple[str, ...]
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.ordered_plan_ids) != len(self.scores):
            raise ValueError("one score per ranked plan")
        if len(set(self.ordered_plan_ids)) != len(self.ordered_plan_ids):
            raise ValueError("ranked plan ids must be distinct")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "ordered_plan_ids": list(self.ordered_plan_ids),
            "scores": list(self.scores),
        }


def ranking_from_dict(raw: Mapping) -> Ranking:
    return Ranking(
        method=raw["method"],
        ordered_plan_ids=tuple(raw["ordered_plan_ids"]),
        scores=tuple(float(s) for s in raw["scores"]),
    )


def _order(scored: list[tuple[str, float]], descending: bool = True) -> Ranking | list:
    # ties break toward the lexically smaller plan id
    return sorted(scored, key=lambda pair: (-pair[1] if descending else pair[1], pair[0]))


def rubric_rank(candidates: Sequence[Candidate], hardest_first: bool = True) -> Ranking:
    scored = [
        (c.plan_id, float(score_query(c.query).total)) for c in candidates
    ]
    ordered = _order(scored, descending=hardest_first)
    return Ranking(
        method="rubric",
        ordered_plan_ids=tuple(pid for pid, _ in ordered),
        scores=tuple(score for _, score in ordered),
    )


# --- model scoring ----------------------------------------------------------

_INT_TOKEN = re.compile(r"-?\d+")


def _score_prompt(plan: Plan, evaluation_code: str) -> str:
    return (
        "You will judge how useful one travel plan is as a worked example "
        "for teaching a planner model.\n\n"
        "The plan is checked by this evaluation code:\n\n"
        f"{evaluation_code}\n\n"
        "Candidate plan:\n"
        f"{serialize_plan(plan)}\n"
        "Rate the plan's value as a teaching example on a scale from 1 to "
        "100. Answer with the number alone."
    )


def _parse_score(text: str) -> float | None:
    match = _INT_TOKEN.search(text)
    if match is None:
        return None
    value = int(match.group())
    if 1 <= value <= 100:
        return float(value)
    return None


def llm_score_rounds(
    plan: Plan,
    evaluation_code: str,
    model: ModelClient,
    repeats: int = 10,
) -> list[float]:
    """Score one plan `repeats` times; each round retries unusable replies
    up to three times before giving up."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    prompt = _score_prompt(plan, evaluation_code)
    rounds = []
    for _ in range(repeats):
        value = None
        for _attempt in range(3):
            value = _parse_score(model.complete(SCORER_ROLE, prompt, temperature=1.0))
            if value is not None:
                break
        if value is None:
            raise ScoreParseError("no 1-100 score in three replies")
        rounds.append(value)
    return rounds


def llm_score(
    plan: Plan,
    evaluation_code: str,
    model: ModelClient,
    repeats: int = 10,
) -> float:
    rounds = llm_score_rounds(plan, evaluation_code, model, repeats=repeats)
    return sum(rounds) / len(rounds)


def llm_score_table(
    candidates: Sequence[Candidate],
    evaluation_code: str,
    model: ModelClient,
    repeats: int = 10,
) -> dict[str, list[float]]:
    return {
        c.plan_id: llm_score_rounds(c.plan, evaluation_code, model, repeats=repeats)
        for c in candidates
    }


def llm_rank(
    candidates: Sequence[Candidate],
    evaluation_code: str,
    model: ModelClient,
    repeats: int = 10,
) -> Ranking:
    if len(candidates) < 2:
        raise ValueError("ranking needs at least two candidates")
    table = llm_score_table(candidates, evaluation_code, model, repeats=repeats)
    scored = [(pid, sum(rounds) / len(rounds)) for pid, rounds in table.items()]
    ordered = _order(scored)
    return Ranking(
        method="llm",
        ordered_plan_ids=tuple(pid for pid, _ in ordered),
        scores=tuple(score for _, score in ordered),
    )


def round_rankings(table: Mapping[str, Sequence[float]]) -> list[list[str]]:
    """Per-round orderings (best first) from a plan-id to round-scores table."""
    ids = sorted(table)
    repeats = {len(table[i]) for i in ids}
    if len(repeats) != 1:
        raise ValueError("every plan needs the same number of rounds")
    rounds = repeats.pop()
    out = []
    for r in range(rounds):
        scored = [(pid, float(table[pid][r])) for pid in ids]
        out.append([pid for pid, _ in _order(scored)])
    return out


# --- fitness ordering against a validation split ----------------------------

@dataclass(frozen=True)
class GroundTruthEntry:
    plan_id: str
    average: float
    per_run: tuple[float, ...]


@dataclass(frozen=True)
class GroundTruthOrdering:
    entries: tuple[GroundTruthEntry, ...]
    metric: str
    runs: int

    @property
    def ordered_plan_ids(self) -> tuple[str, ...]:
        return tuple(e.plan_id for e in self.entries)

    @property
    def worst_plan_id(self) -> str:
        return self.entries[-1].plan_id

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "runs": self.runs,
            "entries": [
                {"plan_id": e.plan_id, "average": e.average, "per_run": list(e.per_run)}
                for e in self.entries
            ],
        }


def _metric_value(reports, metric: str) -> float:
    m = batch_metrics(reports)
    if metric == "commonsense-micro":
        return m.commonsense_micro
    if metric == "commonsense-macro":
        return m.commonsense_macro
    if metric == "final":
        return m.final_rate
    raise ValueError(f"unknown ordering metric {metric!r}; choose from {ORDERING_METRICS}")


def ground_truth_ordering(
    candidates: Sequence[Candidate],
    skeleton: SkeletonPrompt,
    validation_queries: Sequence[Query],
    sandbox: Sandbox,
    model: ModelClient,
    runs: int = 3,
    metric: str = "commonsense-micro",
) -> GroundTruthOrdering:
    """Measure each candidate by what it teaches: plug it in as the prompt's
    sole example, plan the whole validation split `runs` times, and order
    candidates by their average pass rate."""
    if not candidates:
        raise ValueError("no candidates to order")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if metric not in ORDERING_METRICS:
        raise ValueError(f"unknown ordering metric {metric!r}; choose from {ORDERING_METRICS}")
    entries = []
    for candidate in candidates:
        trial = replace(skeleton, examples=((candidate.request_text, candidate.plan_text),))
        prompt_text = trial.render()
        per_run = []
        for _ in range(runs):
            reports = generate_reports(
                prompt_text, validation_queries, sandbox, model, model_errors="undelivered"
            )
            per_run.append(_metric_value(reports, metric))
        entries.append(
            GroundTruthEntry(
                plan_id=candidate.plan_id,
                average=sum(per_run) / len(per_run),
                per_run=tuple(per_run),
            )
        )
    entries.sort(key=lambda e: (-e.average, e.plan_id))
    return GroundTruthOrdering(entries=tuple(entries), metric=metric, runs=runs)


# --- combining rankings -----------------------------------------------------

def hybrid_select(rankings: Sequence[Ranking], human_override: str | None = None) -> str:
    """Pick one plan id from several rankings by Borda count; an explicit
    human override wins outright but must name a ranked plan."""
    if not rankings:
        raise ValueError("no rankings to combine")
    candidate_ids: set[str] = set()
    for ranking in rankings:
        candidate_ids.update(ranking.ordered_plan_ids)
    if human_override is not None:
        if human_override not in candidate_ids:
            raise OverrideNotInCandidates(
                f"{human_override!r} is not among the ranked plans"
            )
        return human_override
    points: dict[str, int] = {pid: 0 for pid in candidate_ids}
    for ranking in rankings:
        n = len(ranking.ordered_plan_ids)
        for position, pid in enumerate(ranking.ordered_plan_ids):
            points[pid] += n - 1 - position
    best = sorted(points.items(), key=lambda pair: (-pair[1], pair[0]))
    return best[0][0]
