#!/usr/bin/env python3
"""Brute-force feasibility oracle: enumerate every structurally complete plan
for a small query and re-check the engine against an independent implementation.

On sandboxes small enough to enumerate, the oracle walks the full candidate
space (every transport x lodging x dinner x attraction combination), which
gives two guarantees: a trustworthy feasible-plan count, and a 100%%
cross-check of the constraint engine on thousands of inputs.
"""

import time

from planloop.constraints import evaluate
from planloop.fixtures import demo_queries, demo_sandbox
from planloop.oracle import (
    enumerate_candidates,
    enumerate_feasible,
    estimate_candidate_space,
    independent_recheck,
)


def main() -> None:
    sandbox = demo_sandbox()
    q1 = demo_queries()[0]

    space = estimate_candidate_space(q1, sandbox)
    print(f"query q1 ({q1.duration_days} days, {q1.people} people, "
          f"budget {q1.budget:.0f}): candidate space = {space}")

    start = time.monotonic()
    feasible = enumerate_feasible(q1, sandbox, limit=10_000)
    elapsed = time.monotonic() - start
    print(f"feasible plans (all 13 applicable checks pass): "
          f"{len(feasible)} / {space} in {elapsed:.2f}s")

    cheapest = min(feasible, key=lambda p: evaluate(p, q1, sandbox).total_cost)
    cost = evaluate(cheapest, q1, sandbox).total_cost
    print(f"cheapest feasible plan costs {cost:.2f}")

    start = time.monotonic()
    checked = disagreements = 0
    for plan in enumerate_candidates(q1, sandbox, limit=10_000):
        engine = {o.constraint_id: o.status for o in evaluate(plan, q1, sandbox).outcomes}
        if engine != independent_recheck(plan, q1, sandbox):
            disagreements += 1
        checked += 1
    elapsed = time.monotonic() - start
    print(f"\nengine vs independent re-check: {checked} plans compared, "
          f"{disagreements} disagreements in {elapsed:.2f}s")


if __name__ == "__main__":
    main()
