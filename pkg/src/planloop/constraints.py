"""Constraint catalog, cost model, and the plan evaluation engine.

Eight commonsense checks apply to every delivered plan; five hard checks
apply only when the query states the matching requirement. Evaluation always
reports all thirteen outcomes in catalog order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Callable, Iterator, Mapping

from .plans import Plan, Query
from .sandbox import Sandbox

COMMONSENSE = "commonsense"
HARD = "hard"

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"


class UnknownEntity(LookupError):
    """A plan names an entity absent from the reference tables, so a value
    that depends on its record (price, rules) cannot be computed."""


@dataclass(frozen=True)
class ConstraintDescriptor:
    id: str
    title: str
    category: str
    description: str


CATALOG: tuple[ConstraintDescriptor, ...] = (
    ConstraintDescriptor(
        "within-sandbox",
        "Within sandbox",
        COMMONSENSE,
        "Every flight, ground route, restaurant, attraction, and accommodation "
        "named in the plan exists in the reference tables.",
    ),
    ConstraintDescriptor(
        "complete-information",
        "Complete information",
        COMMONSENSE,
        "The plan covers exactly the requested number of days, names "
        "transportation on every city change, and books accommodation on "
        "every night except the last day's return.",
    ),
    ConstraintDescriptor(
        "within-current-city",
        "Within current city",
        COMMONSENSE,
        "Meals, attractions, and lodging each sit in the city the traveler "
        "occupies that day; on travel days either endpoint serves meals and "
        "sightseeing, but the overnight stay must be in the arrival city.",
    ),
    ConstraintDescriptor(
        "reasonable-city-route",
        "Reasonable city route",
        COMMONSENSE,
        "The trip departs the origin on day 1, returns to it on the final "
        "day, moves between cities only with a matching transportation "
        "entry, never doubles back, and visits exactly the requested cities.",
    ),
    ConstraintDescriptor(
        "diverse-restaurants",
        "Diverse restaurants",
        COMMONSENSE,
        "No restaurant is visited twice across the whole trip.",
    ),
    ConstraintDescriptor(
        "diverse-attractions",
        "Diverse attractions",
        COMMONSENSE,
        "No attraction is visited twice across the whole trip.",
    ),
    ConstraintDescriptor(
        "non-conflicting-transportation",
        "Non-conflicting transportation",
        COMMONSENSE,
        "The trip never mixes flights with self-driving.",
    ),
    ConstraintDescriptor(
        "minimum-nights",
        "Minimum nights",
        COMMONSENSE,
        "Each consecutive stay at an accommodation meets that listing's "
        "minimum-night requirement.",
    ),
    ConstraintDescriptor(
        "budget",
        "Budget",
        HARD,
        "The total trip cost stays within the stated budget.",
    ),
    ConstraintDescriptor(
        "room-rules",
        "Room rules",
        HARD,
        "Every accommodation permits what the party needs: a stated need for "
        "children, parties, pets, smoking, or visitors rules out listings "
        "that forbid it.",
    ),
    ConstraintDescriptor(
        "room-type",
        "Room type",
        HARD,
        "Every accommodation matches the requested room type.",
    ),
    ConstraintDescriptor(
        "cuisines",
        "Cuisines",
        HARD,
        "Across the trip's meals, every requested cuisine appears at least once.",
    ),
    ConstraintDescriptor(
        "transportation-request",
        "Transportation request",
        HARD,
        "The plan honors a stated ban on self-driving or on flights.",
    ),
)

COMMONSENSE_IDS = tuple(d.id for d in CATALOG if d.category == COMMONSENSE)
HARD_IDS = tuple(d.id for d in CATALOG if d.category == HARD)

_CATEGORY_BY_ID = {d.id: d.category for d in CATALOG}


def export_catalog() -> list[dict]:
    return [
        {"id": d.id, "title": d.title, "category": d.category, "description": d.description}
        for d in CATALOG
    ]


@dataclass(frozen=True)
class ConstraintOutcome:
    constraint_id: str
    status: str
    message: str

    def __post_init__(self):
        if self.constraint_id not in _CATEGORY_BY_ID:
            raise ValueError(f"unknown constraint id {self.constraint_id!r}")
        if self.status not in (PASS, FAIL, NOT_APPLICABLE):
            raise ValueError(f"unknown status {self.status!r}")


@dataclass(frozen=True)
class EvaluationReport:
    query_id: str
    delivered: bool
    outcomes: tuple[ConstraintOutcome, ...]
    total_cost: float | None

    def __post_init__(self):
        if self.delivered:
            ids = [o.constraint_id for o in self.outcomes]
            if ids != [d.id for d in CATALOG]:
                raise ValueError("delivered reports must carry all outcomes in catalog order")
        elif self.outcomes:
            raise ValueError("undelivered reports carry no outcomes")

    def outcome(self, constraint_id: str) -> ConstraintOutcome:
        for o in self.outcomes:
            if o.constraint_id == constraint_id:
                return o
        raise KeyError(constraint_id)

    def category_counts(self, category: str) -> tuple[int, int]:
        """(applicable, passed) over this report for one category."""
        applicable = passed = 0
        for o in self.outcomes:
            if _CATEGORY_BY_ID[o.constraint_id] != category:
                continue
            if o.status == NOT_APPLICABLE:
                continue
            applicable += 1
            if o.status == PASS:
                passed += 1
        return applicable, passed

    def all_pass(self, category: str) -> bool:
        if not self.delivered:
            return False
        return all(
            o.status != FAIL
            for o in self.outcomes
            if _CATEGORY_BY_ID[o.constraint_id] == category
        )

    @property
    def final_pass(self) -> bool:
        return self.all_pass(COMMONSENSE) and self.all_pass(HARD)

    @property
    def failures(self) -> tuple[str, ...]:
        return tuple(o.constraint_id for o in self.outcomes if o.status == FAIL)

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "delivered": self.delivered,
            "total_cost": self.total_cost,
            "outcomes": [
                {"constraint_id": o.constraint_id, "status": o.status, "message": o.message}
                for o in self.outcomes
            ],
        }


def report_from_dict(raw: Mapping) -> EvaluationReport:
    return EvaluationReport(
        query_id=raw["query_id"],
        delivered=raw["delivered"],
        total_cost=raw["total_cost"],
        outcomes=tuple(
            ConstraintOutcome(o["constraint_id"], o["status"], o["message"])
            for o in raw["outcomes"]
        ),
    )


# --- shared plan walkers ----------------------------------------------------

_MEAL_SLOTS = ("breakfast", "lunch", "dinner")


def _meals(plan: Plan) -> Iterator[tuple[int, str, tuple[str, str]]]:
    for day in plan.days:
        for slot in _MEAL_SLOTS:
            place = getattr(day, slot)
            if place is not None:
                yield day.day_index, slot, place


def _lodging_runs(plan: Plan) -> list[tuple[tuple[str, str], int]]:
    """Maximal runs of consecutive nights at the same listing, in plan order."""
    runs: list[tuple[tuple[str, str], int]] = []
    current: tuple[str, str] | None = None
    nights = 0
    for day in plan.days:
        stay = day.accommodation
        if stay is None:
            if current is not None:
                runs.append((current, nights))
            current, nights = None, 0
        elif stay == current:
            nights += 1
        else:
            if current is not None:
                runs.append((current, nights))
            current, nights = stay, 1
    if current is not None:
        runs.append((current, nights))
    return runs


def _day_end_city(day) -> str:
    return day.transition[1] if day.transition else day.city


def _day_start_city(day) -> str:
    return day.transition[0] if day.transition else day.city


# --- cost model -------------------------------------------------------------

@dataclass(frozen=True)
class CostBreakdown:
    flights: float
    ground: float
    lodging: float
    meals: float

    @property
    def total(self) -> float:
        return self.flights + self.ground + self.lodging + self.meals


def cost_breakdown(plan: Plan, query: Query, sandbox: Sandbox) -> CostBreakdown:
    """Price the plan for the whole party.

    Flights and meals charge per person. Taxis seat 4 and hired cars seat 5,
    so ground legs charge per vehicle. Lodging charges per room per night,
    with rooms = ceil(people / maximum_occupancy).
    """
    people = query.people
    flights = ground = lodging = meals = 0.0
    for day in plan.days:
        leg = day.transportation
        if leg is None:
            continue
        if leg.mode == "flight":
            record = sandbox.flight(leg.reference_id, leg.origin, leg.destination)
            if record is None:
                raise UnknownEntity(f"flight {leg.reference_id} ({leg.origin} to {leg.destination})")
            flights += record.price * people
        else:
            route = sandbox.route(leg.origin, leg.destination)
            if route is None:
                raise UnknownEntity(f"ground route {leg.origin} to {leg.destination}")
            if leg.mode == "taxi":
                ground += route.taxi_cost * ceil(people / 4)
            else:
                ground += route.self_driving_cost * ceil(people / 5)
    for (name, city), nights in _lodging_runs(plan):
        record = sandbox.lodging(name, city)
        if record is None:
            raise UnknownEntity(f"accommodation {name} ({city})")
        lodging += record.price_per_night * nights * ceil(people / record.maximum_occupancy)
    for _, _, (name, city) in _meals(plan):
        record = sandbox.restaurant(name, city)
        if record is None:
            raise UnknownEntity(f"restaurant {name} ({city})")
        meals += record.average_cost * people
    return CostBreakdown(flights=flights, ground=ground, lodging=lodging, meals=meals)


def total_cost(plan: Plan, query: Query, sandbox: Sandbox) -> float:
    return cost_breakdown(plan, query, sandbox).total


# --- commonsense checks -----------------------------------------------------

def check_within_sandbox(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    missing: list[str] = []
    for day in plan.days:
        leg = day.transportation
        if leg is not None:
            if leg.mode == "flight":
                if sandbox.flight(leg.reference_id, leg.origin, leg.destination) is None:
                    missing.append(f"flight {leg.reference_id} ({leg.origin} to {leg.destination})")
            elif sandbox.route(leg.origin, leg.destination) is None:
                missing.append(f"ground route {leg.origin} to {leg.destination}")
        for slot in _MEAL_SLOTS:
            place = getattr(day, slot)
            if place is not None and sandbox.restaurant(*place) is None:
                missing.append(f"restaurant {place[0]} ({place[1]})")
        for place in day.attractions:
            if sandbox.attraction(*place) is None:
                missing.append(f"attraction {place[0]} ({place[1]})")
        if day.accommodation is not None and sandbox.lodging(*day.accommodation) is None:
            missing.append(f"accommodation {day.accommodation[0]} ({day.accommodation[1]})")
    if missing:
        return False, "unknown entities: " + "; ".join(dict.fromkeys(missing))
    return True, "every named entity exists in the reference tables"


def check_complete_information(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    problems: list[str] = []
    if len(plan.days) != query.duration_days:
        problems.append(
            f"plan covers {len(plan.days)} days, the trip lasts {query.duration_days}"
        )
    last_index = plan.days[-1].day_index
    for day in plan.days:
        if day.transition is not None and day.transportation is None:
            problems.append(f"day {day.day_index} changes city without transportation")
        if day.day_index < last_index and day.accommodation is None:
            problems.append(f"day {day.day_index} books no accommodation")
    if problems:
        return False, "; ".join(problems)
    return True, "days, transportation, and lodging are all accounted for"


def check_within_current_city(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    problems: list[str] = []
    for day in plan.days:
        allowed = set(day.cities)
        here = " or ".join(day.cities)
        for slot in _MEAL_SLOTS:
            place = getattr(day, slot)
            if place is not None and place[1] not in allowed:
                problems.append(f"day {day.day_index} {slot} is in {place[1]}, not {here}")
        for place in day.attractions:
            if place[1] not in allowed:
                problems.append(f"day {day.day_index} attraction is in {place[1]}, not {here}")
        if day.accommodation is not None:
            overnight = _day_end_city(day)
            if day.accommodation[1] != overnight:
                problems.append(
                    f"day {day.day_index} sleeps in {day.accommodation[1]}, "
                    f"the night is spent in {overnight}"
                )
    if problems:
        return False, "; ".join(problems)
    return True, "every booking sits in that day's city"


def check_reasonable_city_route(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    problems: list[str] = []
    days = plan.days
    first, last = days[0], days[-1]
    if first.transition is None:
        problems.append("day 1 never leaves the origin city")
    elif first.transition[0] != query.origin_city:
        problems.append(f"day 1 departs {first.transition[0]}, the trip starts in {query.origin_city}")
    if last.transition is None:
        problems.append("the final day does not return home")
    elif last.transition[1] != query.origin_city:
        problems.append(f"the final day ends in {last.transition[1]}, not {query.origin_city}")
    for prev, cur in zip(days, days[1:]):
        if _day_start_city(cur) != _day_end_city(prev):
            problems.append(
                f"day {cur.day_index} starts in {_day_start_city(cur)} "
                f"but day {prev.day_index} ended in {_day_end_city(prev)}"
            )
    for day in days:
        leg = day.transportation
        if day.transition is not None:
            if leg is not None and (leg.origin, leg.destination) != day.transition:
                problems.append(
                    f"day {day.day_index} transportation runs {leg.origin} to "
                    f"{leg.destination}, the city line says {day.transition[0]} "
                    f"to {day.transition[1]}"
                )
        elif leg is not None:
            problems.append(f"day {day.day_index} lists transportation without changing city")
    ends: list[str] = []
    for day in days[:-1]:
        end = _day_end_city(day)
        if not ends or ends[-1] != end:
            ends.append(end)
    if query.origin_city in ends:
        problems.append("the route passes back through the origin mid-trip")
    visited = [c for c in ends if c != query.origin_city]
    if len(set(visited)) != len(visited):
        problems.append("a destination city is visited twice")
    elif query.destinations:
        if set(visited) != set(query.destinations):
            expected = ", ".join(query.destinations)
            got = ", ".join(visited) if visited else "none"
            problems.append(f"visited {got}; the query names {expected}")
    elif query.required_city_count is not None and len(visited) != query.required_city_count:
        problems.append(f"{len(visited)} cities visited, {query.required_city_count} required")
    if problems:
        return False, "; ".join(problems)
    return True, "the route is a single loop through the requested cities"


def check_diverse_restaurants(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    seen: dict[tuple[str, str], int] = {}
    for _, _, place in _meals(plan):
        seen[place] = seen.get(place, 0) + 1
    repeats = [name for (name, _), count in seen.items() if count > 1]
    if repeats:
        return False, "repeated restaurants: " + ", ".join(repeats)
    return True, "no restaurant is visited twice"


def check_diverse_attractions(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    seen: dict[tuple[str, str], int] = {}
    for day in plan.days:
        for place in day.attractions:
            seen[place] = seen.get(place, 0) + 1
    repeats = [name for (name, _), count in seen.items() if count > 1]
    if repeats:
        return False, "repeated attractions: " + ", ".join(repeats)
    return True, "no attraction is visited twice"


def check_non_conflicting_transportation(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    modes = {day.transportation.mode for day in plan.days if day.transportation is not None}
    if "flight" in modes and "self-driving" in modes:
        return False, "the trip mixes flights with self-driving"
    return True, "transportation modes are compatible"


def check_minimum_nights(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    problems: list[str] = []
    for (name, city), nights in _lodging_runs(plan):
        record = sandbox.lodging(name, city)
        if record is None:
            continue  # within-sandbox reports the unknown listing
        if nights < record.minimum_nights:
            problems.append(
                f"{name} requires {record.minimum_nights} nights, the plan books {nights}"
            )
    if problems:
        return False, "; ".join(problems)
    return True, "every stay meets its minimum-night rule"


# --- hard checks ------------------------------------------------------------

def check_budget(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    try:
        cost = total_cost(plan, query, sandbox)
    except UnknownEntity as exc:
        return False, f"cost is not computable: unknown {exc}"
    if cost > query.budget:
        return False, f"total cost {cost:g} exceeds the budget {query.budget:g}"
    return True, f"total cost {cost:g} fits the budget {query.budget:g}"


def check_room_rules(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    problems: list[str] = []
    for (name, city), _ in _lodging_runs(plan):
        record = sandbox.lodging(name, city)
        if record is None:
            problems.append(f"{name} ({city}) is unknown, house rules cannot be verified")
            continue
        for need in sorted(query.room_rules):
            if f"no-{need}" in record.house_rules:
                problems.append(f"{name} does not allow {need}")
    if problems:
        return False, "; ".join(dict.fromkeys(problems))
    return True, "every accommodation permits the party's needs"


def check_room_type(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    problems: list[str] = []
    for (name, city), _ in _lodging_runs(plan):
        record = sandbox.lodging(name, city)
        if record is None:
            problems.append(f"{name} ({city}) is unknown, room type cannot be verified")
        elif record.room_type != query.room_type:
            problems.append(f"{name} is a {record.room_type}, not a {query.room_type}")
    if problems:
        return False, "; ".join(dict.fromkeys(problems))
    return True, f"every accommodation is a {query.room_type}"


def check_cuisines(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    covered: set[str] = set()
    for _, _, place in _meals(plan):
        record = sandbox.restaurant(*place)
        if record is not None:
            covered |= record.cuisines
    missing = set(query.cuisines) - covered
    if missing:
        return False, "cuisines never served: " + ", ".join(sorted(missing))
    return True, "every requested cuisine appears in the trip's meals"


def check_transportation_request(plan: Plan, query: Query, sandbox: Sandbox) -> tuple[bool, str]:
    banned = "self-driving" if query.transportation_request == "no-self-driving" else "flight"
    offending = [
        f"day {day.day_index}"
        for day in plan.days
        if day.transportation is not None and day.transportation.mode == banned
    ]
    if offending:
        return False, f"{banned} used on " + ", ".join(offending)
    return True, f"the plan avoids {banned} travel"


_CHECKS: dict[str, Callable[[Plan, Query, Sandbox], tuple[bool, str]]] = {
    "within-sandbox": check_within_sandbox,
    "complete-information": check_complete_information,
    "within-current-city": check_within_current_city,
    "reasonable-city-route": check_reasonable_city_route,
    "diverse-restaurants": check_diverse_restaurants,
    "diverse-attractions": check_diverse_attractions,
    "non-conflicting-transportation": check_non_conflicting_transportation,
    "minimum-nights": check_minimum_nights,
    "budget": check_budget,
    "room-rules": check_room_rules,
    "room-type": check_room_type,
    "cuisines": check_cuisines,
    "transportation-request": check_transportation_request,
}


def is_applicable(constraint_id: str, query: Query) -> bool:
    """Hard checks apply only when the query states the requirement; every
    commonsense check always applies."""
    if constraint_id == "room-rules":
        return bool(query.room_rules)
    if constraint_id == "room-type":
        return query.room_type is not None
    if constraint_id == "cuisines":
        return bool(query.cuisines)
    if constraint_id == "transportation-request":
        return query.transportation_request is not None
    return True


def undelivered_report(query: Query) -> EvaluationReport:
    return EvaluationReport(query_id=query.id, delivered=False, outcomes=(), total_cost=None)


def evaluate(plan: Plan | None, query: Query, sandbox: Sandbox) -> EvaluationReport:
    """Run all thirteen checks against a plan; None records a non-delivery."""
    if plan is None:
        return undelivered_report(query)
    outcomes = []
    for descriptor in CATALOG:
        if not is_applicable(descriptor.id, query):
            outcomes.append(
                ConstraintOutcome(descriptor.id, NOT_APPLICABLE, "the query sets no such requirement")
            )
            continue
        ok, message = _CHECKS[descriptor.id](plan, query, sandbox)
        outcomes.append(ConstraintOutcome(descriptor.id, PASS if ok else FAIL, message))
    try:
        cost: float | None = total_cost(plan, query, sandbox)
    except UnknownEntity:
        cost = None
    return EvaluationReport(
        query_id=query.id, delivered=True, outcomes=tuple(outcomes), total_cost=cost
    )
