#!/usr/bin/env python3
"""Skeleton prompt assembly: constraint summaries + reference tables + examples.

The planning prompt is built from three parts: a preamble with one plain-
language statement per catalog constraint, the sandbox tables rendered as
labeled CSV blocks, and zero or more worked examples. Adding an example is
the single mutation the optimization loop performs — each addition changes
the prompt digest, which is how runs are audited.
"""

from planloop.concept import build_skeleton
from planloop.fixtures import demo_good_plan, demo_queries, demo_sandbox
from planloop.planner import describe_query
from planloop.plans import serialize_plan


def main() -> None:
    sandbox = demo_sandbox()
    skeleton = build_skeleton(sandbox)
    text = skeleton.render()

    print(f"bare skeleton: {len(text)} characters, digest {skeleton.digest()}")
    print("\nfirst lines:")
    for line in text.splitlines()[:8]:
        print(f"    {line}")

    print("\nreference tables included:")
    for line in text.splitlines():
        if line.startswith("## "):
            print(f"    {line[3:]}")

    q1 = demo_queries()[0]
    grown = skeleton.with_example(describe_query(q1), serialize_plan(demo_good_plan()))
    print(f"\nafter adding one worked example: digest {grown.digest()} "
          f"(was {skeleton.digest()})")
    print(f"examples carried: {len(grown.examples)}; original untouched: "
          f"{len(skeleton.examples)}")

    capped = build_skeleton(sandbox, max_reference_rows=1)
    print(f"\nrow-capped variant (1 row per table): {len(capped.render())} characters")


if __name__ == "__main__":
    main()
