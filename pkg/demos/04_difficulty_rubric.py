#!/usr/bin/env python3
"""Difficulty rubric: turning a travel request into a comparable score.

Queries earn points for longer trips, more cities, bigger parties, and each
stated requirement (room rules, cuisines, a transport preference). The total
is how the human-style discriminator decides which candidate example teaches
the prompt the most — harder examples first.
"""

from planloop.discriminators import rubric_score
from planloop.fixtures import demo_candidates, demo_queries
from planloop.plans import QueryFeatures, extract_features


def show(label, query) -> None:
    score = rubric_score(extract_features(query), query.id)
    parts = (
        f"days {score.day_points}",
        f"cities {score.city_points}",
        f"people {score.people_points}",
        f"rules {score.room_rule_points}",
        f"cuisines {score.cuisine_points}",
        f"transport {score.transportation_points}",
    )
    print(f"  {label:<32} total {score.total:>2}  ({', '.join(parts)})")


def main() -> None:
    print("scale endpoints:")
    floor = rubric_score(QueryFeatures(3, 1, 1, 0, 0, False))
    ceiling = rubric_score(QueryFeatures(7, 3, 5, 2, 3, True))
    print(f"  simplest query scores {floor.total}; "
          f"a 7-day, 3-city, 5-person trip with 2 room rules, "
          f"3 cuisines and a transport preference scores {ceiling.total}")

    print("\nvalidation queries:")
    for query in demo_queries():
        show(f"{query.id}: {query.raw_text[:40]}...", query)

    print("\ncandidate training queries (what each example would teach):")
    for candidate in demo_candidates():
        show(f"{candidate.plan_id} <- query {candidate.query.id}", candidate.query)

    print("\nhardest-first order is the rubric ranking used in the loop.")


if __name__ == "__main__":
    main()
