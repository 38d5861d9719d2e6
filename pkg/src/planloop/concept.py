"""Turning constraint knowledge into a planner prompt skeleton.

Constraint statements can come from three places: the catalog's own
descriptions (explicit), a model-written summary of a check's source code
plus observed verdicts (whitebox), or a model-written summary of probe
responses from an opaque evaluation system (blackbox). The skeleton prompt
assembles a preamble, the statements, a reference-data excerpt, and worked
examples into the text the planner model receives.
"""

from __future__ import annotations

import hashlib
import inspect
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from .constraints import CATALOG, ConstraintDescriptor, evaluate
from .models import ModelClient
from .plans import Plan, Query, serialize_plan
from .sandbox import CATEGORIES, Sandbox, csv_text

SUMMARY_SOURCES = ("explicit", "whitebox", "blackbox")

SUMMARIZER_ROLE = "summarizer"


class EmptySummary(RuntimeError):
    """The summarizer returned blank text on every attempt."""


class SystemUnavailable(RuntimeError):
    """A probe target raised instead of returning a verdict."""


@dataclass(frozen=True)
class ConstraintSummary:
    constraint_id: str
    statement: str
    source: str

    def __post_init__(self):
        if self.source not in SUMMARY_SOURCES:
            raise ValueError(f"unknown summary source {self.source!r}")
        if not self.statement.strip():
            raise ValueError("statement must be non-empty")


@dataclass(frozen=True)
class IOTrace:
    input_label: str
    verdict: str


@dataclass(frozen=True)
class NamedCheck:
    name: str
    fn: Callable

    @property
    def source(self) -> str:
        return inspect.getsource(self.fn)


DEFAULT_PREAMBLE = """\
You are a meticulous travel planner. Given a trip request and reference
tables of flights, accommodations, restaurants, attractions, and ground
routes, produce a day-by-day itinerary.

Write the itinerary exactly in this form, one block per day, with a blank
line between blocks:

Day 1:
Current City: from <origin> to <city>
Transportation: Flight <number>, from <origin> to <city>
Breakfast: <name>, <city>
Attraction: <name>, <city>
Lunch: <name>, <city>
Dinner: <name>, <city>
Accommodation: <name>, <city>

Use '-' for any slot you leave empty. On a day spent inside one city, write
the Current City line as the city name alone; on travel days write it as
'from <A> to <B>'. Ground travel is written 'Self-driving, from <A> to <B>'
or 'Taxi, from <A> to <B>'. Multiple attractions on one day are joined by
'; '. Name only entities that appear in the reference tables. Output the
itinerary and nothing else."""

DEFAULT_PROMPT_TEMPLATE = """\
{preamble}

Observe every rule below.
{constraints}

Reference tables:
{reference_data}

{examples}"""


@dataclass(frozen=True)
class SkeletonPrompt:
    preamble: str
    summaries: tuple[ConstraintSummary, ...]
    reference_data: str
    examples: tuple[tuple[str, str], ...] = ()
    template: str = DEFAULT_PROMPT_TEMPLATE

    def render(self) -> str:
        constraints = "\n".join(f"- {s.statement}" for s in self.summaries)
        example_blocks = []
        for i, (request, plan_text) in enumerate(self.examples, 1):
            example_blocks.append(
                f"Example {i} request:\n{request}\n\nExample {i} itinerary:\n{plan_text.rstrip()}\n"
            )
        examples = ("\n".join(example_blocks) + "\n") if example_blocks else ""
        return self.template.format(
            preamble=self.preamble,
            constraints=constraints,
            reference_data=self.reference_data,
            examples=examples,
        )

    def digest(self) -> str:
        return hashlib.sha256(self.render().encode("utf-8")).hexdigest()[:16]

    def with_example(self, request: str, plan_text: str) -> "SkeletonPrompt":
        return replace(self, examples=self.examples + ((request, plan_text),))

    def to_dict(self) -> dict:
        return {
            "preamble": self.preamble,
            "summaries": [
                {"constraint_id": s.constraint_id, "statement": s.statement, "source": s.source}
                for s in self.summaries
            ],
            "reference_data": self.reference_data,
            "examples": [list(pair) for pair in self.examples],
            "template": self.template,
        }

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
        return path


def skeleton_from_dict(raw: Mapping) -> SkeletonPrompt:
    return SkeletonPrompt(
        preamble=raw["preamble"],
        summaries=tuple(
            ConstraintSummary(s["constraint_id"], s["statement"], s["source"])
            for s in raw["summaries"]
        ),
        reference_data=raw["reference_data"],
        examples=tuple((r, p) for r, p in raw["examples"]),
        template=raw["template"],
    )


def load_skeleton(path: str | Path) -> SkeletonPrompt:
    return skeleton_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --- explicit source --------------------------------------------------------

def extract_explicit(
    catalog: Sequence[ConstraintDescriptor] = CATALOG,
) -> tuple[ConstraintSummary, ...]:
    return tuple(
        ConstraintSummary(d.id, f"{d.title}: {d.description}", "explicit") for d in catalog
    )


# --- whitebox source --------------------------------------------------------

def _plan_label(plan: Plan | None) -> str:
    if plan is None:
        return "none"
    return hashlib.sha256(serialize_plan(plan).encode("utf-8")).hexdigest()[:8]


def capture_io_traces(
    system: Callable[[tuple[Plan | None, Query]], str],
    cases: Sequence[tuple[Plan | None, Query]],
) -> tuple[IOTrace, ...]:
    """Run labeled (plan, query) cases through a verdict system."""
    traces = []
    for plan, query in cases:
        label = f"{query.id}/{_plan_label(plan)}"
        try:
            verdict = str(system((plan, query)))
        except Exception as exc:
            raise SystemUnavailable(f"verdict system failed on {label}: {exc}") from exc
        traces.append(IOTrace(input_label=label, verdict=verdict))
    return tuple(traces)


def _render_traces(traces: Sequence[IOTrace]) -> str:
    return "\n".join(f"{t.input_label} -> {t.verdict}" for t in traces)


def _ask(model: ModelClient, prompt: str) -> str:
    for _ in range(3):
        text = model.complete(SUMMARIZER_ROLE, prompt).strip()
        if text:
            return text
    raise EmptySummary("summarizer returned blank text three times")


def summarize_whitebox(
    constraint_id: str,
    code: str,
    model: ModelClient,
    traces: Sequence[IOTrace] = (),
) -> ConstraintSummary:
    """Summarize a check from its source, then refine once against traces."""
    first = _ask(
        model,
        "Below is the source code of one travel-plan constraint check.\n\n"
        f"{code}\n\n"
        "State the rule it enforces in one or two sentences, phrased as an "
        "instruction to a travel planner.",
    )
    if not traces:
        return ConstraintSummary(constraint_id, first, "whitebox")
    refined = _ask(
        model,
        "Below is the source code of one travel-plan constraint check, "
        "verdicts it produced on sample inputs, and a draft summary.\n\n"
        f"{code}\n\nObserved verdicts:\n{_render_traces(traces)}\n\n"
        f"Draft summary:\n{first}\n\n"
        "Rewrite the summary so it matches the observed behavior. Answer "
        "with the summary alone.",
    )
    return ConstraintSummary(constraint_id, refined, "whitebox")


# --- blackbox source --------------------------------------------------------

def probe_blackbox(
    system: Callable[[Any], Any],
    probes: Sequence[tuple[str, Any]],
) -> tuple[IOTrace, ...]:
    """Feed labeled payloads to an opaque verdict system."""
    traces = []
    for label, payload in probes:
        try:
            verdict = str(system(payload))
        except Exception as exc:
            raise SystemUnavailable(f"probe {label!r} failed: {exc}") from exc
        traces.append(IOTrace(input_label=label, verdict=verdict))
    return tuple(traces)


def summarize_blackbox(
    constraint_id: str,
    traces: Sequence[IOTrace],
    model: ModelClient,
) -> ConstraintSummary:
    if not traces:
        raise ValueError("blackbox summarization needs at least one trace")
    text = _ask(
        model,
        "An opaque travel-plan checker was probed with the labeled inputs "
        "below; each line shows input -> verdict.\n\n"
        f"{_render_traces(traces)}\n\n"
        "State the rule the checker appears to enforce in one or two "
        "sentences, phrased as an instruction to a travel planner.",
    )
    return ConstraintSummary(constraint_id, text, "blackbox")


def engine_verdict_system(
    sandbox: Sandbox, constraint_id: str
) -> Callable[[tuple[Plan | None, Query]], str]:
    """Expose one engine check as a verdict system for tracing or probing."""

    def system(case: tuple[Plan | None, Query]) -> str:
        plan, query = case
        if plan is None:
            return "undelivered"
        report = evaluate(plan, query, sandbox)
        return report.outcome(constraint_id).status

    return system


def budget_sweep(
    plan: Plan, query: Query, amounts: Sequence[float]
) -> list[tuple[str, tuple[Plan, Query]]]:
    """Probe set holding the plan fixed while the budget varies."""
    return [
        (f"budget={amount:g}", (plan, replace(query, budget=amount)))
        for amount in amounts
    ]


# --- assembly ---------------------------------------------------------------

def render_sandbox_excerpt(sandbox: Sandbox, max_rows: int | None = None) -> str:
    """All five tables as labeled CSV blocks, optionally truncated per table."""
    blocks = []
    for category in CATEGORIES:
        blocks.append(f"## {category}\n{csv_text(sandbox, category, max_rows=max_rows)}")
    return "\n".join(blocks)


def build_skeleton(
    sandbox: Sandbox,
    summaries: Sequence[ConstraintSummary] | None = None,
    preamble: str = DEFAULT_PREAMBLE,
    examples: Sequence[tuple[str, str]] = (),
    template: str = DEFAULT_PROMPT_TEMPLATE,
    max_reference_rows: int | None = None,
) -> SkeletonPrompt:
    if summaries is None:
        summaries = extract_explicit()
    return SkeletonPrompt(
        preamble=preamble,
        summaries=tuple(summaries),
        reference_data=render_sandbox_excerpt(sandbox, max_rows=max_reference_rows),
        examples=tuple(examples),
        template=template,
    )
