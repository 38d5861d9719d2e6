"""Reference-data tables: archive ingest, CSV export/import, lookups, synthesis.

The sandbox is the closed dataset every plan entity must come from. It holds
five tables (flights, accommodations, restaurants, attractions, distances),
is immutable once built, and round-trips losslessly through per-category CSV
files with fixed names.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields
from functools import cached_property
from pathlib import Path
from random import Random
from typing import Any, Callable, Iterable, Mapping, Sequence

CATEGORIES = ("flights", "accommodations", "restaurants", "attractions", "distances")

ROOM_TYPES = ("entire room", "private room", "shared room")
HOUSE_RULE_TAGS = ("no-children", "no-parties", "no-pets", "no-smoking", "no-visitors")

CUISINE_TAGS = (
    "american",
    "chinese",
    "french",
    "indian",
    "italian",
    "mediterranean",
    "mexican",
    "thai",
)


class ArchiveNotFound(FileNotFoundError):
    """Raised when the reference archive path does not exist."""


class MalformedRecord(ValueError):
    """A record violates the schema or a table invariant. Never skipped silently."""

    def __init__(self, category: str, row: int | None, reason: str):
        self.category = category
        self.row = row
        self.reason = reason
        where = f"{category}[{row}]" if row is not None else category
        super().__init__(f"{where}: {reason}")


class UnknownCategory(KeyError):
    """Raised when a lookup names a category outside the fixed five."""


@dataclass(frozen=True)
class FlightRecord:
    flight_number: str
    origin_city: str
    destination_city: str
    departure_time: str
    arrival_time: str
    date: str
    price: float

    def validate(self) -> None:
        if not self.flight_number:
            raise ValueError("flight_number empty")
        if not self.origin_city or not self.destination_city:
            raise ValueError("city names must be non-empty")
        if self.origin_city == self.destination_city:
            raise ValueError("origin equals destination")
        if self.price < 0:
            raise ValueError("price negative")


@dataclass(frozen=True)
class AccommodationRecord:
    name: str
    city: str
    price_per_night: float
    room_type: str
    house_rules: frozenset[str]
    minimum_nights: int
    maximum_occupancy: int

    def validate(self) -> None:
        if not self.name or not self.city:
            raise ValueError("name and city must be non-empty")
        if self.price_per_night < 0:
            raise ValueError("price_per_night negative")
        if self.room_type not in ROOM_TYPES:
            raise ValueError(f"unknown room_type {self.room_type!r}")
        bad = set(self.house_rules) - set(HOUSE_RULE_TAGS)
        if bad:
            raise ValueError(f"unknown house rules {sorted(bad)}")
        if self.minimum_nights < 1:
            raise ValueError("minimum_nights must be >= 1")
        if self.maximum_occupancy < 1:
            raise ValueError("maximum_occupancy must be >= 1")


@dataclass(frozen=True)
class RestaurantRecord:
    name: str
    city: str
    cuisines: frozenset[str]
    average_cost: float

    def validate(self) -> None:
        if not self.name or not self.city:
            raise ValueError("name and city must be non-empty")
        if not self.cuisines:
            raise ValueError("cuisines must be non-empty")
        if self.average_cost < 0:
            raise ValueError("average_cost negative")


@dataclass(frozen=True)
class AttractionRecord:
    name: str
    city: str

    def validate(self) -> None:
        if not self.name or not self.city:
            raise ValueError("name and city must be non-empty")


@dataclass(frozen=True)
class GroundRouteRecord:
    origin_city: str
    destination_city: str
    distance: float
    self_driving_cost: float
    taxi_cost: float
    duration: float

    def validate(self) -> None:
        if not self.origin_city or not self.destination_city:
            raise ValueError("city names must be non-empty")
        if self.distance <= 0:
            raise ValueError("distance must be > 0")
        if self.self_driving_cost < 0 or self.taxi_cost < 0:
            raise ValueError("costs must be >= 0")


_RECORD_TYPES = {
    "flights": FlightRecord,
    "accommodations": AccommodationRecord,
    "restaurants": RestaurantRecord,
    "attractions": AttractionRecord,
    "distances": GroundRouteRecord,
}

# Duplicate-key detection within a table.
_TABLE_KEYS: dict[str, Callable[[Any], tuple]] = {
    "flights": lambda r: (r.flight_number, r.date),
    "accommodations": lambda r: (r.name, r.city),
    "restaurants": lambda r: (r.name, r.city),
    "attractions": lambda r: (r.name, r.city),
    "distances": lambda r: (r.origin_city, r.destination_city),
}


@dataclass(frozen=True)
class Sandbox:
    """Immutable bundle of the five reference tables."""

    flights: tuple[FlightRecord, ...] = ()
    accommodations: tuple[AccommodationRecord, ...] = ()
    restaurants: tuple[RestaurantRecord, ...] = ()
    attractions: tuple[AttractionRecord, ...] = ()
    distances: tuple[GroundRouteRecord, ...] = ()

    def __post_init__(self):
        for category in CATEGORIES:
            table = getattr(self, category)
            key = _TABLE_KEYS[category]
            seen: dict[tuple, int] = {}
            for i, record in enumerate(table):
                try:
                    record.validate()
                except ValueError as exc:
                    raise MalformedRecord(category, i, str(exc)) from exc
                k = key(record)
                if k in seen:
                    raise MalformedRecord(category, i, f"duplicate key {k!r}")
                seen[k] = i

    def table(self, category: str) -> tuple:
        if category not in CATEGORIES:
            raise UnknownCategory(category)
        return getattr(self, category)

    # Lookups below are index-backed; the indexes are built lazily and the
    # dataclass stays logically immutable.

    @cached_property
    def _flights_by_number(self) -> dict[str, tuple[FlightRecord, ...]]:
        out: dict[str, list[FlightRecord]] = {}
        for r in self.flights:
            out.setdefault(r.flight_number, []).append(r)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _lodgings(self) -> dict[tuple[str, str], AccommodationRecord]:
        return {(r.name, r.city): r for r in self.accommodations}

    @cached_property
    def _restaurants(self) -> dict[tuple[str, str], RestaurantRecord]:
        return {(r.name, r.city): r for r in self.restaurants}

    @cached_property
    def _attractions(self) -> dict[tuple[str, str], AttractionRecord]:
        return {(r.name, r.city): r for r in self.attractions}

    @cached_property
    def _routes(self) -> dict[tuple[str, str], GroundRouteRecord]:
        return {(r.origin_city, r.destination_city): r for r in self.distances}

    def flights_between(self, origin: str, destination: str) -> tuple[FlightRecord, ...]:
        return tuple(
            r
            for r in self.flights
            if r.origin_city == origin and r.destination_city == destination
        )

    def flight(self, number: str, origin: str, destination: str) -> FlightRecord | None:
        for r in self._flights_by_number.get(number, ()):
            if r.origin_city == origin and r.destination_city == destination:
                return r
        return None

    def lodging(self, name: str, city: str) -> AccommodationRecord | None:
        return self._lodgings.get((name, city))

    def restaurant(self, name: str, city: str) -> RestaurantRecord | None:
        return self._restaurants.get((name, city))

    def attraction(self, name: str, city: str) -> AttractionRecord | None:
        return self._attractions.get((name, city))

    def route(self, origin: str, destination: str) -> GroundRouteRecord | None:
        return self._routes.get((origin, destination))

    def lodgings_in(self, city: str) -> tuple[AccommodationRecord, ...]:
        return tuple(r for r in self.accommodations if r.city == city)

    def restaurants_in(self, city: str) -> tuple[RestaurantRecord, ...]:
        return tuple(r for r in self.restaurants if r.city == city)

    def attractions_in(self, city: str) -> tuple[AttractionRecord, ...]:
        return tuple(r for r in self.attractions if r.city == city)


def lookup(sandbox: Sandbox, category: str, filters: Mapping[str, Any]) -> list:
    """Return records of `category` matching every filter, in table order.

    Filter values compare by equality; a callable value is used as a predicate.
    """
    table = sandbox.table(category)
    record_fields = {f.name for f in fields(_RECORD_TYPES[category])}
    for name in filters:
        if name not in record_fields:
            raise ValueError(f"unknown field {name!r} for category {category!r}")
    out = []
    for record in table:
        ok = True
        for name, want in filters.items():
            have = getattr(record, name)
            if callable(want):
                if not want(have):
                    ok = False
                    break
            elif have != want:
                ok = False
                break
        if ok:
            out.append(record)
    return out


# --- archive ingest -------------------------------------------------------

def _coerce(category: str, row_index: int, raw: Mapping[str, Any]) -> Any:
    record_type = _RECORD_TYPES[category]
    expected = {f.name for f in fields(record_type)}
    got = set(raw)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        parts = []
        if missing:
            parts.append(f"missing fields {missing}")
        if extra:
            parts.append(f"unexpected fields {extra}")
        raise MalformedRecord(category, row_index, "; ".join(parts))
    values = dict(raw)
    try:
        for f in fields(record_type):
            v = values[f.name]
            if f.type in ("float", float):
                values[f.name] = float(v)
            elif f.type in ("int", int):
                values[f.name] = int(v)
            elif "frozenset" in str(f.type):
                if isinstance(v, str):
                    raise ValueError(f"{f.name} must be a list of tags, got a string")
                values[f.name] = frozenset(str(x) for x in v)
            else:
                if not isinstance(v, str):
                    raise ValueError(f"{f.name} must be a string")
        record = record_type(**values)
        record.validate()
    except MalformedRecord:
        raise
    except (TypeError, ValueError) as exc:
        raise MalformedRecord(category, row_index, str(exc)) from exc
    return record


def ingest_reference_archive(path: str | Path) -> Sandbox:
    """Load an archive document (category name -> list of flat records).

    Unknown category keys are an error: silent data loss here would corrupt
    every downstream constraint check.
    """
    path = Path(path)
    if not path.exists():
        raise ArchiveNotFound(str(path))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRecord("archive", None, f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedRecord("archive", None, "top level must be an object keyed by category")
    unknown = set(doc) - set(CATEGORIES)
    if unknown:
        raise MalformedRecord(sorted(unknown)[0], None, "unknown category")
    tables: dict[str, tuple] = {}
    for category in CATEGORIES:
        rows = doc.get(category, [])
        if not isinstance(rows, list):
            raise MalformedRecord(category, None, "category value must be a list")
        records = []
        for i, raw in enumerate(rows):
            if not isinstance(raw, dict):
                raise MalformedRecord(category, i, "record must be an object")
            records.append(_coerce(category, i, raw))
        tables[category] = tuple(records)
    return Sandbox(**tables)


def write_reference_archive(sandbox: Sandbox, path: str | Path) -> Path:
    """Serialize a sandbox back to the archive document format."""
    doc: dict[str, list] = {}
    for category in CATEGORIES:
        rows = []
        for record in sandbox.table(category):
            row: dict[str, Any] = {}
            for f in fields(record):
                v = getattr(record, f.name)
                row[f.name] = sorted(v) if isinstance(v, frozenset) else v
            rows.append(row)
        doc[category] = rows
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# --- CSV export / import --------------------------------------------------

def _format_cell(value: Any) -> str:
    if isinstance(value, frozenset):
        return "|".join(sorted(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_cell(field_type: Any, text: str) -> Any:
    if field_type in ("float", float):
        return float(text)
    if field_type in ("int", int):
        return int(text)
    if "frozenset" in str(field_type):
        return frozenset(text.split("|")) if text else frozenset()
    return text


def csv_text(sandbox: Sandbox, category: str, max_rows: int | None = None) -> str:
    """Render one category as CSV text, header row first."""
    record_type = _RECORD_TYPES[category]
    columns = [f.name for f in fields(record_type)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    table = sandbox.table(category)
    if max_rows is not None:
        table = table[:max_rows]
    for record in table:
        writer.writerow([_format_cell(getattr(record, c)) for c in columns])
    return buf.getvalue()


def export_csv_tables(
    sandbox: Sandbox, directory: str | Path, include_empty: bool = False
) -> list[Path]:
    """Write one fixed-name CSV per category; empty tables are skipped unless
    `include_empty` is set (then they get a header-only file)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for category in CATEGORIES:
        if not sandbox.table(category) and not include_empty:
            continue
        target = directory / f"{category}.csv"
        target.write_text(csv_text(sandbox, category), encoding="utf-8")
        written.append(target)
    return written


def ingest_csv_tables(directory: str | Path) -> Sandbox:
    """Inverse of export_csv_tables; a missing category file yields an empty table."""
    directory = Path(directory)
    tables: dict[str, tuple] = {}
    for category in CATEGORIES:
        path = directory / f"{category}.csv"
        if not path.exists():
            tables[category] = ()
            continue
        record_type = _RECORD_TYPES[category]
        columns = [f.name for f in fields(record_type)]
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
        if not rows:
            raise MalformedRecord(category, 0, "missing header row")
        if rows[0] != columns:
            raise MalformedRecord(category, 0, f"header {rows[0]!r} != expected {columns!r}")
        records = []
        for i, row in enumerate(rows[1:]):
            if len(row) != len(columns):
                raise MalformedRecord(
                    category, i, f"expected {len(columns)} columns, got {len(row)}"
                )
            raw = {}
            try:
                for f, cell in zip(fields(record_type), row):
                    raw[f.name] = _parse_cell(f.type, cell)
            except ValueError as exc:
                raise MalformedRecord(category, i, str(exc)) from exc
            records.append(_coerce(category, i, raw))
        tables[category] = tuple(records)
    return Sandbox(**tables)


# --- synthesis ------------------------------------------------------------

CITY_POOL = (
    "Avalon",
    "Bramblewick",
    "Cresthaven",
    "Dorminster",
    "Elmsworth",
    "Farrowdale",
    "Gullport",
    "Hartsmere",
)

_LODGING_FIRST = ("Harbor", "Cedar", "Juniper", "Lantern", "Meadow", "Quarry", "Saffron", "Willow")
_LODGING_SECOND = ("Inn", "Lodge", "House", "Rooms", "Suites", "Retreat")
_RESTAURANT_FIRST = ("Copper", "Juniper", "Old Mill", "Blue Door", "Iron Pan", "Green Fern", "Salt Flat", "Wild Basil")
_RESTAURANT_SECOND = ("Kettle", "Table", "Cafe", "Bistro", "Kitchen", "Grill")
_ATTRACTION_FIRST = ("Harbor Lights", "Old Mill", "Granite Ridge", "Whispering Pines", "Clockwork", "Riverbend")
_ATTRACTION_SECOND = ("Museum", "Park", "Gardens", "Observatory", "Gallery", "Fort")


def _unique_name(rng: Random, first: Sequence[str], second: Sequence[str], used: set[str]) -> str:
    base = f"{rng.choice(first)} {rng.choice(second)}"
    name = base
    n = 2
    while name in used:
        name = f"{base} {n}"
        n += 1
    used.add(name)
    return name


def synthesize_sandbox(seed: int, size_profile: Mapping[str, int]) -> Sandbox:
    """Generate a small deterministic sandbox for desk-scale testing.

    Identical (seed, profile) pairs produce identical sandboxes. Flights and
    ground routes connect the origin city to destination cities; lodging,
    restaurants, and attractions live in the first destination city so that
    small profiles still admit feasible itineraries.
    """
    unknown = set(size_profile) - set(CATEGORIES)
    if unknown:
        raise ValueError(f"unknown categories in size profile: {sorted(unknown)}")
    counts = {c: int(size_profile.get(c, 0)) for c in CATEGORIES}
    for c, n in counts.items():
        if n < 0:
            raise ValueError(f"negative count for {c}")

    rng = Random(seed)
    origin = CITY_POOL[0]
    primary = CITY_POOL[1]

    flights = []
    for i in range(counts["flights"]):
        outbound = i % 2 == 0
        a, b = (origin, primary) if outbound else (primary, origin)
        dep_h = rng.randrange(6, 20)
        dep_m = rng.choice((0, 15, 30, 45))
        dur = rng.randrange(60, 240)
        arr_h = (dep_h * 60 + dep_m + dur) // 60 % 24
        arr_m = (dep_m + dur) % 60
        flights.append(
            FlightRecord(
                flight_number=f"FL{100 + i}",
                origin_city=a,
                destination_city=b,
                departure_time=f"{dep_h:02d}:{dep_m:02d}",
                arrival_time=f"{arr_h:02d}:{arr_m:02d}",
                date=f"2026-03-{1 + i // 2:02d}",
                price=float(rng.randrange(80, 300)),
            )
        )

    used: set[str] = set()
    accommodations = []
    for _ in range(counts["accommodations"]):
        name = _unique_name(rng, _LODGING_FIRST, _LODGING_SECOND, used)
        rules = frozenset(tag for tag in HOUSE_RULE_TAGS if rng.random() < 0.3)
        accommodations.append(
            AccommodationRecord(
                name=name,
                city=primary,
                price_per_night=float(rng.randrange(40, 200)),
                room_type=ROOM_TYPES[rng.randrange(len(ROOM_TYPES))],
                house_rules=rules,
                minimum_nights=rng.choices((1, 2, 3), weights=(7, 2, 1))[0],
                maximum_occupancy=rng.randrange(1, 5),
            )
        )

    used = set()
    restaurants = []
    for _ in range(counts["restaurants"]):
        name = _unique_name(rng, _RESTAURANT_FIRST, _RESTAURANT_SECOND, used)
        k = rng.randrange(1, 4)
        cuisines = frozenset(rng.sample(CUISINE_TAGS, k))
        restaurants.append(
            RestaurantRecord(
                name=name,
                city=primary,
                cuisines=cuisines,
                average_cost=float(rng.randrange(8, 45)),
            )
        )

    used = set()
    attractions = []
    for _ in range(counts["attractions"]):
        name = _unique_name(rng, _ATTRACTION_FIRST, _ATTRACTION_SECOND, used)
        attractions.append(AttractionRecord(name=name, city=primary))

    distances = []
    for i in range(counts["distances"]):
        # Each extra pair pulls in the next city so route keys stay unique.
        other = CITY_POOL[1 + i // 2]
        a, b = (origin, other) if i % 2 == 0 else (other, origin)
        distances.append(
            GroundRouteRecord(
                origin_city=a,
                destination_city=b,
                distance=float(rng.randrange(60, 600)),
                self_driving_cost=float(rng.randrange(20, 90)),
                taxi_cost=float(rng.randrange(30, 120)),
                duration=float(rng.randrange(45, 300)),
            )
        )

    return Sandbox(
        flights=tuple(flights),
        accommodations=tuple(accommodations),
        restaurants=tuple(restaurants),
        attractions=tuple(attractions),
        distances=tuple(distances),
    )
