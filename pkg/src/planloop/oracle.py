"""Independent ground truth for desk-scale sandboxes.

Two tools live here: a from-scratch recheck of every constraint that shares
no logic with the evaluation engine, and an exhaustive enumerator over all
structurally well-formed candidate plans for small reference sets. Together
they let tests corroborate the engine verdict-by-verdict instead of trusting
it about itself.

This module deliberately imports no check functions or cost helpers from the
engine; only the shared data types.
"""

from __future__ import annotations

from itertools import permutations, product
from typing import Iterator, Sequence

from .plans import DayEntry, Plan, Query, TransportLeg
from .sandbox import Sandbox

ORACLE_CONSTRAINT_IDS = (
    "within-sandbox",
    "complete-information",
    "within-current-city",
    "reasonable-city-route",
    "diverse-restaurants",
    "diverse-attractions",
    "non-conflicting-transportation",
    "minimum-nights",
    "budget",
    "room-rules",
    "room-type",
    "cuisines",
    "transportation-request",
)


class SearchSpaceTooLarge(RuntimeError):
    """Enumeration was refused because the candidate count exceeds the cap."""

    def __init__(self, estimate: int, limit: int):
        self.estimate = estimate
        self.limit = limit
        super().__init__(f"{estimate} candidates exceed the cap of {limit}")


class UnsupportedQuery(ValueError):
    """The enumerator only handles explicit-destination queries."""


def _ceil_div(n: int, d: int) -> int:
    return -(-n // d)


def independent_recheck(plan: Plan, query: Query, sandbox: Sandbox) -> dict[str, str]:
    """Re-derive all thirteen verdicts from the raw tables.

    Returns constraint id -> "pass" | "fail" | "not-applicable".
    """
    flight_table = {}
    for f in sandbox.flights:
        flight_table[(f.flight_number, f.origin_city, f.destination_city)] = f
    route_table = {(r.origin_city, r.destination_city): r for r in sandbox.distances}
    hotel_table = {(h.name, h.city): h for h in sandbox.accommodations}
    restaurant_table = {(r.name, r.city): r for r in sandbox.restaurants}
    attraction_keys = {(a.name, a.city) for a in sandbox.attractions}

    days = plan.days
    meals: list[tuple[str, str]] = []
    for day in days:
        for slot in (day.breakfast, day.lunch, day.dinner):
            if slot is not None:
                meals.append(slot)
    sights = [place for day in days for place in day.attractions]
    stays = [day.accommodation for day in days if day.accommodation is not None]
    legs = [day.transportation for day in days if day.transportation is not None]

    # within-sandbox
    known = True
    for leg in legs:
        if leg.mode == "flight":
            if (leg.reference_id, leg.origin, leg.destination) not in flight_table:
                known = False
        elif (leg.origin, leg.destination) not in route_table:
            known = False
    for place in meals:
        if place not in restaurant_table:
            known = False
    for place in sights:
        if place not in attraction_keys:
            known = False
    for place in stays:
        if place not in hotel_table:
            known = False

    # complete-information
    complete = len(days) == query.duration_days
    for day in days:
        if day.transition is not None and day.transportation is None:
            complete = False
        if day is not days[-1] and day.accommodation is None:
            complete = False

    # within-current-city
    local = True
    for day in days:
        here = set(day.cities)
        for slot in (day.breakfast, day.lunch, day.dinner):
            if slot is not None and slot[1] not in here:
                local = False
        for place in day.attractions:
            if place[1] not in here:
                local = False
        if day.accommodation is not None:
            overnight = day.transition[1] if day.transition else day.city
            if day.accommodation[1] != overnight:
                local = False

    # reasonable-city-route
    route_ok = True
    if days[0].transition is None or days[0].transition[0] != query.origin_city:
        route_ok = False
    if days[-1].transition is None or days[-1].transition[1] != query.origin_city:
        route_ok = False
    for a, b in zip(days, days[1:]):
        a_end = a.transition[1] if a.transition else a.city
        b_start = b.transition[0] if b.transition else b.city
        if a_end != b_start:
            route_ok = False
    for day in days:
        if day.transition is not None:
            if day.transportation is not None and (
                (day.transportation.origin, day.transportation.destination) != day.transition
            ):
                route_ok = False
        elif day.transportation is not None:
            route_ok = False
    collapsed: list[str] = []
    for day in days[:-1]:
        end = day.transition[1] if day.transition else day.city
        if not collapsed or collapsed[-1] != end:
            collapsed.append(end)
    if query.origin_city in collapsed:
        route_ok = False
    visited = [c for c in collapsed if c != query.origin_city]
    if len(set(visited)) != len(visited):
        route_ok = False
    elif query.destinations:
        if set(visited) != set(query.destinations):
            route_ok = False
    elif query.required_city_count is not None:
        if len(visited) != query.required_city_count:
            route_ok = False

    # diversity
    distinct_restaurants = len(set(meals)) == len(meals)
    distinct_attractions = len(set(sights)) == len(sights)

    # non-conflicting-transportation
    modes = {leg.mode for leg in legs}
    compatible = not ({"flight", "self-driving"} <= modes)

    # lodging runs (stay, nights), shared by three checks and the cost rebuild
    building: list[list] = []
    for day in days:
        stay = day.accommodation
        if stay is None:
            continue
        if building and building[-1][0] == stay and day.day_index == building[-1][2] + 1:
            building[-1][1] += 1
            building[-1][2] = day.day_index
        else:
            building.append([stay, 1, day.day_index])
    runs: list[tuple[tuple[str, str], int]] = [(stay, nights) for stay, nights, _ in building]

    nights_ok = True
    for stay, nights in runs:
        hotel = hotel_table.get(stay)
        if hotel is not None and nights < hotel.minimum_nights:
            nights_ok = False

    # budget
    cost: float | None = 0.0
    for leg in legs:
        if leg.mode == "flight":
            flight = flight_table.get((leg.reference_id, leg.origin, leg.destination))
            if flight is None:
                cost = None
                break
            cost += flight.price * query.people
        else:
            route = route_table.get((leg.origin, leg.destination))
            if route is None:
                cost = None
                break
            if leg.mode == "taxi":
                cost += route.taxi_cost * _ceil_div(query.people, 4)
            else:
                cost += route.self_driving_cost * _ceil_div(query.people, 5)
    if cost is not None:
        for stay, nights in runs:
            hotel = hotel_table.get(stay)
            if hotel is None:
                cost = None
                break
            cost += hotel.price_per_night * nights * _ceil_div(query.people, hotel.maximum_occupancy)
    if cost is not None:
        for place in meals:
            restaurant = restaurant_table.get(place)
            if restaurant is None:
                cost = None
                break
            cost += restaurant.average_cost * query.people
    within_budget = cost is not None and cost <= query.budget

    # room-rules
    rules_ok = True
    for stay, _ in runs:
        hotel = hotel_table.get(stay)
        if hotel is None:
            rules_ok = False
            continue
        for need in query.room_rules:
            if f"no-{need}" in hotel.house_rules:
                rules_ok = False

    # room-type
    type_ok = True
    for stay, _ in runs:
        hotel = hotel_table.get(stay)
        if hotel is None or hotel.room_type != query.room_type:
            type_ok = False

    # cuisines
    served: set[str] = set()
    for place in meals:
        restaurant = restaurant_table.get(place)
        if restaurant is not None:
            served |= set(restaurant.cuisines)
    cuisines_ok = set(query.cuisines) <= served

    # transportation-request
    if query.transportation_request == "no-self-driving":
        request_ok = "self-driving" not in modes
    else:
        request_ok = "flight" not in modes

    def verdict(ok: bool) -> str:
        return "pass" if ok else "fail"

    return {
        "within-sandbox": verdict(known),
        "complete-information": verdict(complete),
        "within-current-city": verdict(local),
        "reasonable-city-route": verdict(route_ok),
        "diverse-restaurants": verdict(distinct_restaurants),
        "diverse-attractions": verdict(distinct_attractions),
        "non-conflicting-transportation": verdict(compatible),
        "minimum-nights": verdict(nights_ok),
        "budget": verdict(within_budget),
        "room-rules": verdict(rules_ok) if query.room_rules else "not-applicable",
        "room-type": verdict(type_ok) if query.room_type is not None else "not-applicable",
        "cuisines": verdict(cuisines_ok) if query.cuisines else "not-applicable",
        "transportation-request": (
            verdict(request_ok) if query.transportation_request is not None else "not-applicable"
        ),
    }


# --- exhaustive candidate enumeration ---------------------------------------

def _stay_splits(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to split `total` stay days over `parts` cities, in order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _stay_splits(total - first, parts - 1):
            yield (first,) + rest


def _transport_options(sandbox: Sandbox, a: str, b: str) -> list[TransportLeg]:
    options = [
        TransportLeg(mode="flight", origin=a, destination=b, reference_id=f.flight_number)
        for f in sandbox.flights
        if f.origin_city == a and f.destination_city == b
    ]
    if any(r.origin_city == a and r.destination_city == b for r in sandbox.distances):
        options.append(TransportLeg(mode="self-driving", origin=a, destination=b))
        options.append(TransportLeg(mode="taxi", origin=a, destination=b))
    return options


def _day_shapes(query: Query) -> Iterator[list[tuple[str, str | None]]]:
    """Yield day shapes as (home_city, arrived_from) pairs.

    A day with arrived_from set is a transition day; home_city is where the
    evening is spent. The final day returns home with home_city = origin.
    """
    if not query.destinations:
        raise UnsupportedQuery("enumeration needs an explicit destination list")
    k = len(query.destinations)
    free_days = query.duration_days - k - 1
    if free_days < 0:
        return
    for order in permutations(query.destinations):
        for split in _stay_splits(free_days, k):
            shape: list[tuple[str, str | None]] = []
            previous = query.origin_city
            for city, stay_days in zip(order, split):
                shape.append((city, previous))
                shape.extend((city, None) for _ in range(stay_days))
                previous = city
            shape.append((query.origin_city, previous))
            yield shape


def _slot_domains(
    query: Query, sandbox: Sandbox, shape: Sequence[tuple[str, str | None]]
) -> list[list]:
    """Per-day option lists, flattened: transports, lodging, dinners, sights."""
    domains: list[list] = []
    for city, arrived_from in shape:
        if arrived_from is not None:
            domains.append(_transport_options(sandbox, arrived_from, city))
    cities_in_order = []
    for city, _ in shape[:-1]:
        if city not in cities_in_order:
            cities_in_order.append(city)
    for city in cities_in_order:
        domains.append(list(sandbox.lodgings_in(city)))
    for city, _ in shape:
        domains.append([None] + list(sandbox.restaurants_in(city)))
    for city, _ in shape:
        domains.append([None] + list(sandbox.attractions_in(city)))
    return domains


def estimate_candidate_space(query: Query, sandbox: Sandbox) -> int:
    total = 0
    for shape in _day_shapes(query):
        size = 1
        for domain in _slot_domains(query, sandbox, shape):
            size *= len(domain)
        total += size
    return total


def enumerate_candidates(
    query: Query, sandbox: Sandbox, limit: int = 200_000
) -> Iterator[Plan]:
    """Yield every structurally well-formed candidate, in deterministic order.

    Candidates commit to one lodging per city, dinner as the only meal, and
    at most one attraction per day. Most candidates still violate some
    constraint; filtering is the caller's job.
    """
    estimate = estimate_candidate_space(query, sandbox)
    if estimate > limit:
        raise SearchSpaceTooLarge(estimate, limit)
    for shape in _day_shapes(query):
        domains = _slot_domains(query, sandbox, shape)
        n_days = len(shape)
        transitions = [i for i, (_, arrived_from) in enumerate(shape) if arrived_from is not None]
        cities_in_order: list[str] = []
        for city, _ in shape[:-1]:
            if city not in cities_in_order:
                cities_in_order.append(city)
        for combo in product(*domains):
            cursor = 0
            legs = {transitions[i]: combo[cursor + i] for i in range(len(transitions))}
            cursor += len(transitions)
            lodging_by_city = {
                city: combo[cursor + i] for i, city in enumerate(cities_in_order)
            }
            cursor += len(cities_in_order)
            dinners = combo[cursor : cursor + n_days]
            cursor += n_days
            sights = combo[cursor : cursor + n_days]
            days = []
            for i, (city, arrived_from) in enumerate(shape):
                is_last = i == n_days - 1
                dinner = dinners[i]
                sight = sights[i]
                hotel = None if is_last else lodging_by_city[city]
                days.append(
                    DayEntry(
                        day_index=i + 1,
                        city=None if arrived_from is not None else city,
                        transition=(arrived_from, city) if arrived_from is not None else None,
                        transportation=legs.get(i),
                        dinner=(dinner.name, dinner.city) if dinner is not None else None,
                        attractions=((sight.name, sight.city),) if sight is not None else (),
                        accommodation=(hotel.name, hotel.city) if hotel is not None else None,
                    )
                )
            yield Plan(query_id=query.id, days=tuple(days))


def enumerate_feasible(
    query: Query, sandbox: Sandbox, limit: int = 200_000
) -> list[Plan]:
    """All candidates whose independent recheck raises no failure."""
    feasible = []
    for plan in enumerate_candidates(query, sandbox, limit=limit):
        statuses = independent_recheck(plan, query, sandbox)
        if all(status != "fail" for status in statuses.values()):
            feasible.append(plan)
    return feasible
