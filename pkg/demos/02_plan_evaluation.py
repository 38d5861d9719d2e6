#!/usr/bin/env python3
"""Constraint engine: one itinerary in, thirteen verdicts out.

Plans are plain text in a fixed day-block format. The engine parses them,
prices every leg, meal, and night, and checks eight commonsense constraints
(always applicable) plus five hard constraints (only when the request states
them). A refusal counts as undelivered and gets no verdicts at all.
"""

from planloop.constraints import evaluate, undelivered_report
from planloop.fixtures import demo_flawed_plan, demo_good_plan, demo_queries, demo_sandbox
from planloop.plans import serialize_plan


def show(title, report) -> None:
    print(f"\n{title}")
    print(f"  delivered: {report.delivered}")
    if report.total_cost is not None:
        print(f"  total cost: {report.total_cost:.2f}")
    for outcome in report.outcomes:
        mark = {"pass": "ok  ", "fail": "FAIL", "not-applicable": "n/a "}[outcome.status]
        line = f"  [{mark}] {outcome.constraint_id}"
        if outcome.message and outcome.status == "fail":
            line += f" — {outcome.message}"
        print(line)
    if report.delivered:
        print(f"  final verdict: {'pass' if report.final_pass else 'fail'}")


def main() -> None:
    sandbox = demo_sandbox()
    q1, q2 = demo_queries()

    print("the itinerary under review:\n")
    print("\n".join("    " + line for line in serialize_plan(demo_good_plan()).splitlines()))

    show("a clean 3-day plan:", evaluate(demo_good_plan(), q1, sandbox))

    flawed = demo_flawed_plan()
    report = evaluate(flawed, q1, sandbox)
    show("the same trip with a repeated restaurant and attraction:", report)
    print(f"  failures: {', '.join(report.failures)}")

    show("a refusal (query q2):", undelivered_report(q2))


if __name__ == "__main__":
    main()
