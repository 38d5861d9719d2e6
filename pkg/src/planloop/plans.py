"""Queries, itineraries, the plan text grammar, and feature extraction."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

DURATIONS = (3, 5, 7)
ROOM_RULE_NEEDS = ("children", "parties", "pets", "smoking", "visitors")
TRANSPORT_REQUESTS = ("no-self-driving", "no-flights")
TRANSPORT_MODES = ("flight", "self-driving", "taxi")

_DAY_LABELS = (
    "Current City:",
    "Transportation:",
    "Breakfast:",
    "Attraction:",
    "Lunch:",
    "Dinner:",
    "Accommodation:",
)


class ParseError(ValueError):
    """Plan text that does not follow the grammar. Carries the offending line."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


@dataclass(frozen=True)
class Query:
    """One trip request. Destination intent is either an explicit city list or
    a (region, required_city_count) pair, never both."""

    id: str
    origin_city: str
    duration_days: int
    people: int
    budget: float
    raw_text: str = ""
    destinations: tuple[str, ...] = ()
    region: str | None = None
    required_city_count: int | None = None
    room_rules: frozenset[str] = frozenset()
    room_type: str | None = None
    cuisines: frozenset[str] = frozenset()
    transportation_request: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("query id must be non-empty")
        if self.duration_days not in DURATIONS:
            raise ValueError(f"duration_days must be one of {DURATIONS}")
        if self.people < 1:
            raise ValueError("people must be >= 1")
        if self.budget <= 0:
            raise ValueError("budget must be > 0")
        explicit = bool(self.destinations)
        regional = self.region is not None or self.required_city_count is not None
        if explicit and regional:
            raise ValueError("destinations and region/required_city_count are exclusive")
        if not explicit and not regional:
            raise ValueError("one of destinations or region+required_city_count is required")
        if regional and (self.region is None or self.required_city_count is None):
            raise ValueError("region and required_city_count must be set together")
        if regional and self.required_city_count < 1:
            raise ValueError("required_city_count must be >= 1")
        if explicit and len(set(self.destinations)) != len(self.destinations):
            raise ValueError("destinations must be distinct")
        if explicit and self.origin_city in self.destinations:
            raise ValueError("origin_city cannot be a destination")
        bad_rules = set(self.room_rules) - set(ROOM_RULE_NEEDS)
        if bad_rules:
            raise ValueError(f"unknown room rule needs {sorted(bad_rules)}")
        if self.transportation_request is not None and (
            self.transportation_request not in TRANSPORT_REQUESTS
        ):
            raise ValueError(f"unknown transportation request {self.transportation_request!r}")

    @property
    def city_count(self) -> int:
        return len(self.destinations) if self.destinations else int(self.required_city_count)


@dataclass(frozen=True)
class QueryFeatures:
    duration_days: int
    city_count: int
    people: int
    room_rule_count: int
    cuisine_count: int
    has_transportation_request: bool


def extract_features(query: Query) -> QueryFeatures:
    return QueryFeatures(
        duration_days=query.duration_days,
        city_count=query.city_count,
        people=query.people,
        room_rule_count=len(query.room_rules),
        cuisine_count=len(query.cuisines),
        has_transportation_request=query.transportation_request is not None,
    )


@dataclass(frozen=True)
class TransportLeg:
    mode: str
    origin: str
    destination: str
    reference_id: str | None = None  # flight number; ground modes carry none
    cost: float | None = None

    def __post_init__(self):
        if self.mode not in TRANSPORT_MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "flight" and not self.reference_id:
            raise ValueError("flight legs need a flight number")
        if self.mode != "flight" and self.reference_id:
            raise ValueError("ground legs carry no reference id")
        if not self.origin or not self.destination:
            raise ValueError("leg endpoints must be non-empty")


@dataclass(frozen=True)
class DayEntry:
    """One plan day. `city` holds a single name on stay days; transition days
    set `transition=(from_city, to_city)` instead."""

    day_index: int
    city: str | None = None
    transition: tuple[str, str] | None = None
    transportation: TransportLeg | None = None
    breakfast: tuple[str, str] | None = None
    lunch: tuple[str, str] | None = None
    dinner: tuple[str, str] | None = None
    attractions: tuple[tuple[str, str], ...] = ()
    accommodation: tuple[str, str] | None = None

    def __post_init__(self):
        if self.day_index < 1:
            raise ValueError("day_index must be >= 1")
        if (self.city is None) == (self.transition is None):
            raise ValueError("exactly one of city or transition must be set")

    @property
    def cities(self) -> tuple[str, ...]:
        return self.transition if self.transition else (self.city,)


@dataclass(frozen=True)
class Plan:
    query_id: str
    days: tuple[DayEntry, ...]

    def __post_init__(self):
        if not self.days:
            raise ValueError("plan must have at least one day")
        indices = [d.day_index for d in self.days]
        if indices != list(range(1, len(self.days) + 1)):
            raise ValueError(f"day indices must run 1..{len(self.days)}, got {indices}")


# --- text grammar ---------------------------------------------------------

def _serialize_place(pair: tuple[str, str] | None) -> str:
    if pair is None:
        return "-"
    return f"{pair[0]}, {pair[1]}"


def _serialize_leg(leg: TransportLeg | None) -> str:
    if leg is None:
        return "-"
    if leg.mode == "flight":
        head = f"Flight {leg.reference_id}"
    elif leg.mode == "self-driving":
        head = "Self-driving"
    else:
        head = "Taxi"
    text = f"{head}, from {leg.origin} to {leg.destination}"
    if leg.cost is not None:
        cost = int(leg.cost) if float(leg.cost).is_integer() else leg.cost
        text += f", cost: {cost}"
    return text


def serialize_plan(plan: Plan) -> str:
    """Render the canonical text form: one block per day, blank line between
    blocks, every label present on every day, `-` for absent slots."""
    blocks = []
    for day in plan.days:
        if day.transition:
            city = f"from {day.transition[0]} to {day.transition[1]}"
        else:
            city = day.city
        lines = [
            f"Day {day.day_index}:",
            f"Current City: {city}",
            f"Transportation: {_serialize_leg(day.transportation)}",
            f"Breakfast: {_serialize_place(day.breakfast)}",
            f"Attraction: {'; '.join(_serialize_place(a) for a in day.attractions) if day.attractions else '-'}",
            f"Lunch: {_serialize_place(day.lunch)}",
            f"Dinner: {_serialize_place(day.dinner)}",
            f"Accommodation: {_serialize_place(day.accommodation)}",
        ]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _parse_place(line_no: int, label: str, text: str) -> tuple[str, str] | None:
    if text == "-":
        return None
    if ", " not in text:
        raise ParseError(line_no, f"{label} must be 'Name, City' or '-', got {text!r}")
    name, city = text.rsplit(", ", 1)
    if not name or not city:
        raise ParseError(line_no, f"{label} has an empty name or city")
    return (name, city)


def _parse_leg(line_no: int, text: str) -> TransportLeg | None:
    if text == "-":
        return None
    parts = text.split(", ")
    if len(parts) < 2:
        raise ParseError(line_no, f"transportation entry {text!r} is missing its route")
    head = parts[0]
    route = parts[1]
    cost: float | None = None
    if len(parts) == 3:
        if not parts[2].startswith("cost: "):
            raise ParseError(line_no, f"trailing field must be 'cost: <amount>', got {parts[2]!r}")
        try:
            cost = float(parts[2][len("cost: "):])
        except ValueError:
            raise ParseError(line_no, f"cost is not a number in {parts[2]!r}") from None
    elif len(parts) > 3:
        raise ParseError(line_no, f"too many fields in transportation entry {text!r}")
    if head.startswith("Flight "):
        mode, ref = "flight", head[len("Flight "):]
        if not ref:
            raise ParseError(line_no, "flight entry is missing its number")
    elif head == "Self-driving":
        mode, ref = "self-driving", None
    elif head == "Taxi":
        mode, ref = "taxi", None
    else:
        raise ParseError(line_no, f"unknown transportation head {head!r}")
    if not route.startswith("from ") or " to " not in route:
        raise ParseError(line_no, f"route must be 'from <A> to <B>', got {route!r}")
    origin, destination = route[len("from "):].split(" to ", 1)
    if not origin or not destination:
        raise ParseError(line_no, "route has an empty endpoint")
    try:
        return TransportLeg(mode=mode, origin=origin, destination=destination,
                            reference_id=ref, cost=cost)
    except ValueError as exc:
        raise ParseError(line_no, str(exc)) from None


def parse_plan(text: str, query_id: str = "") -> Plan:
    """Parse the canonical text form back into a Plan.

    The grammar carries no query id, so callers that know it pass it in;
    parse(serialize(p)) with p.query_id restores the identical value.
    """
    lines = text.split("\n")
    days: list[DayEntry] = []
    i = 0
    expected_day = 1
    n = len(lines)
    while i < n:
        if lines[i].strip() == "":
            i += 1
            continue
        header = lines[i]
        if header != f"Day {expected_day}:":
            raise ParseError(i + 1, f"expected 'Day {expected_day}:', got {header!r}")
        values: dict[str, str] = {}
        for j, label in enumerate(_DAY_LABELS):
            line_no = i + 1 + j
            if line_no >= n:
                raise ParseError(line_no + 1, f"day {expected_day} is missing {label!r}")
            line = lines[line_no]
            if not line.startswith(label + " ") and line != label:
                raise ParseError(line_no + 1, f"expected {label!r} line, got {line!r}")
            values[label] = line[len(label):].strip()
        base = i + 1
        city_text = values["Current City:"]
        if not city_text:
            raise ParseError(base + 1, "current city is empty")
        city: str | None
        transition: tuple[str, str] | None
        if city_text.startswith("from ") and " to " in city_text:
            a, b = city_text[len("from "):].split(" to ", 1)
            if not a or not b:
                raise ParseError(base + 1, "transition has an empty endpoint")
            city, transition = None, (a, b)
        else:
            city, transition = city_text, None
        leg = _parse_leg(base + 2, values["Transportation:"])
        breakfast = _parse_place(base + 3, "breakfast", values["Breakfast:"])
        attraction_text = values["Attraction:"]
        if attraction_text == "-":
            attractions: tuple[tuple[str, str], ...] = ()
        else:
            parts = attraction_text.split("; ")
            attractions = tuple(
                _parse_place(base + 4, "attraction", p) for p in parts
            )
            if any(a is None for a in attractions):
                raise ParseError(base + 4, "attraction list cannot mix entries with '-'")
        lunch = _parse_place(base + 5, "lunch", values["Lunch:"])
        dinner = _parse_place(base + 6, "dinner", values["Dinner:"])
        accommodation = _parse_place(base + 7, "accommodation", values["Accommodation:"])
        try:
            days.append(
                DayEntry(
                    day_index=expected_day,
                    city=city,
                    transition=transition,
                    transportation=leg,
                    breakfast=breakfast,
                    lunch=lunch,
                    dinner=dinner,
                    attractions=attractions,
                    accommodation=accommodation,
                )
            )
        except ValueError as exc:
            raise ParseError(base, str(exc)) from None
        expected_day += 1
        i += 1 + len(_DAY_LABELS)
        if i < n and lines[i].strip() != "":
            raise ParseError(i + 1, "day blocks must be separated by a blank line")
    if not days:
        raise ParseError(1, "no day blocks found")
    try:
        return Plan(query_id=query_id, days=tuple(days))
    except ValueError as exc:
        raise ParseError(1, str(exc)) from None


# --- query serialization ----------------------------------------------------

def query_to_dict(query: Query) -> dict:
    out: dict = {
        "id": query.id,
        "origin_city": query.origin_city,
        "duration_days": query.duration_days,
        "people": query.people,
        "budget": query.budget,
        "raw_text": query.raw_text,
    }
    if query.destinations:
        out["destinations"] = list(query.destinations)
    else:
        out["region"] = query.region
        out["required_city_count"] = query.required_city_count
    if query.room_rules:
        out["room_rules"] = sorted(query.room_rules)
    if query.room_type is not None:
        out["room_type"] = query.room_type
    if query.cuisines:
        out["cuisines"] = sorted(query.cuisines)
    if query.transportation_request is not None:
        out["transportation_request"] = query.transportation_request
    return out


def query_from_dict(raw: Mapping) -> Query:
    known = {
        "id", "origin_city", "duration_days", "people", "budget", "raw_text",
        "destinations", "region", "required_city_count", "room_rules",
        "room_type", "cuisines", "transportation_request",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown query fields {sorted(unknown)}")
    kwargs = dict(raw)
    if "destinations" in kwargs:
        kwargs["destinations"] = tuple(kwargs["destinations"])
    if "room_rules" in kwargs:
        kwargs["room_rules"] = frozenset(kwargs["room_rules"])
    if "cuisines" in kwargs:
        kwargs["cuisines"] = frozenset(kwargs["cuisines"])
    return Query(**kwargs)


def load_queries(path: str | Path) -> list[Query]:
    """Read queries from a JSON file: NDJSON, a JSON array, or one object."""
    text = Path(path).read_text(encoding="utf-8").strip()
    if not text:
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = [json.loads(line) for line in text.split("\n") if line.strip()]
    if isinstance(doc, dict):
        doc = [doc]
    return [query_from_dict(r) for r in doc]


def save_queries(queries: Iterable[Query], path: str | Path) -> Path:
    path = Path(path)
    lines = [json.dumps(query_to_dict(q), sort_keys=True) for q in queries]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return path
