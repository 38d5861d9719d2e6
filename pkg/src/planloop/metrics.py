"""Batch scoring, regression fit, and comparison metrics.

All rates live in [0, 1]; rendering multiplies by 100. The micro rates pool
constraint outcomes across delivered plans, the macro rates count plans whose
applicable constraints all pass, and the final rate counts plans that clear
every applicable constraint in both categories at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .constraints import COMMONSENSE, HARD, EvaluationReport

_EPS = 1e-9


class EmptyBatch(ValueError):
    """Raised when metrics are requested over zero reports."""


class DegenerateInput(ValueError):
    """Raised when a regression fit is undefined for the given points."""


class MissingPlan(KeyError):
    """Raised when a ranking does not contain an expected plan id."""


class ZeroBaseline(ZeroDivisionError):
    """Raised when relative improvement is taken against a zero baseline."""


@dataclass(frozen=True)
class BatchMetrics:
    delivery_rate: float
    commonsense_micro: float
    commonsense_macro: float
    hard_micro: float
    hard_macro: float
    final_rate: float

    def __post_init__(self):
        for name in (
            "delivery_rate",
            "commonsense_micro",
            "commonsense_macro",
            "hard_micro",
            "hard_macro",
            "final_rate",
        ):
            value = getattr(self, name)
            if not (0.0 - _EPS <= value <= 1.0 + _EPS):
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.commonsense_macro > self.delivery_rate + _EPS:
            raise ValueError("commonsense macro cannot exceed the delivery rate")
        if self.hard_macro > self.delivery_rate + _EPS:
            raise ValueError("hard macro cannot exceed the delivery rate")
        if self.final_rate > min(self.commonsense_macro, self.hard_macro) + _EPS:
            raise ValueError("final rate cannot exceed either macro rate")

    def to_dict(self) -> dict:
        return {
            "delivery_rate": self.delivery_rate,
            "commonsense_micro": self.commonsense_micro,
            "commonsense_macro": self.commonsense_macro,
            "hard_micro": self.hard_micro,
            "hard_macro": self.hard_macro,
            "final_rate": self.final_rate,
        }


def metrics_from_dict(raw: Mapping) -> BatchMetrics:
    return BatchMetrics(**{k: float(raw[k]) for k in (
        "delivery_rate",
        "commonsense_micro",
        "commonsense_macro",
        "hard_micro",
        "hard_macro",
        "final_rate",
    )})


def batch_metrics(reports: Sequence[EvaluationReport]) -> BatchMetrics:
    """Score one batch of evaluation reports."""
    total = len(reports)
    if total == 0:
        raise EmptyBatch("no reports to score")
    delivered = sum(1 for r in reports if r.delivered)

    def micro(category: str) -> float:
        applicable = passed = 0
        for r in reports:
            if not r.delivered:
                continue
            a, p = r.category_counts(category)
            applicable += a
            passed += p
        return passed / applicable if applicable else 0.0

    def macro(category: str) -> float:
        return sum(1 for r in reports if r.all_pass(category)) / total

    return BatchMetrics(
        delivery_rate=delivered / total,
        commonsense_micro=micro(COMMONSENSE),
        commonsense_macro=macro(COMMONSENSE),
        hard_micro=micro(HARD),
        hard_macro=macro(HARD),
        final_rate=sum(1 for r in reports if r.final_pass) / total,
    )


def category_pass_rate(reports: Sequence[EvaluationReport], category: str) -> float:
    """Pooled pass rate for one category; the fitness signal for example
    selection runs."""
    if not reports:
        raise EmptyBatch("no reports to score")
    applicable = passed = 0
    for r in reports:
        if not r.delivered:
            continue
        a, p = r.category_counts(category)
        applicable += a
        passed += p
    return passed / applicable if applicable else 0.0


def _ranks(values: np.ndarray) -> np.ndarray:
    """Average ranks, 1-based; ties share the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def r_squared(xs: Sequence[float], ys: Sequence[float], use_ranks: bool = False) -> float:
    """Coefficient of determination for the least-squares line through
    (xs, ys). With use_ranks both sides are replaced by their average ranks."""
    if len(xs) != len(ys):
        raise DegenerateInput(f"{len(xs)} xs against {len(ys)} ys")
    if len(xs) < 2:
        raise DegenerateInput("a fit needs at least two points")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if use_ranks:
        x = _ranks(x)
        y = _ranks(y)
    sxx = float(np.sum((x - x.mean()) ** 2))
    syy = float(np.sum((y - y.mean()) ** 2))
    if sxx == 0.0:
        raise DegenerateInput("xs are constant, the slope is undefined")
    if syy == 0.0:
        raise DegenerateInput("ys are constant, explained variance is undefined")
    sxy = float(np.sum((x - x.mean()) * (y - y.mean())))
    return (sxy * sxy) / (sxx * syy)


@dataclass(frozen=True)
class FitResult:
    r_squared: float
    point_count: int
    used_ranks: bool


def fit_scores(xs: Sequence[float], ys: Sequence[float], use_ranks: bool = False) -> FitResult:
    return FitResult(
        r_squared=r_squared(xs, ys, use_ranks=use_ranks),
        point_count=len(xs),
        used_ranks=use_ranks,
    )


def _ordered_ids(ranking) -> Sequence[str]:
    return getattr(ranking, "ordered_plan_ids", ranking)


def worst_plan_avoidance(repeat_rankings: Sequence, worst_plan_id: str) -> tuple[int, int]:
    """Count scoring rounds whose top choice is not the known-worst plan.

    Each element is a ranking object or a plain id sequence, best first.
    Returns (rounds avoided, rounds total).
    """
    avoided = 0
    total = 0
    for ranking in repeat_rankings:
        ids = list(_ordered_ids(ranking))
        if worst_plan_id not in ids:
            raise MissingPlan(worst_plan_id)
        total += 1
        if ids[0] != worst_plan_id:
            avoided += 1
    return avoided, total


def relative_improvement(baseline: float, value: float) -> float:
    """Percentage change from baseline to value."""
    if baseline == 0:
        raise ZeroBaseline("relative improvement is undefined against a zero baseline")
    return (value - baseline) / baseline * 100.0


_TABLE_COLUMNS = (
    ("Delivery", "delivery_rate"),
    ("CS micro", "commonsense_micro"),
    ("CS macro", "commonsense_macro"),
    ("Hard micro", "hard_micro"),
    ("Hard macro", "hard_macro"),
    ("Final", "final_rate"),
)


def render_metrics_table(rows: Iterable[tuple[str, BatchMetrics]]) -> str:
    """Plain-text table, one labeled row per batch, percentages to 2 decimals."""
    rows = list(rows)
    label_width = max([len("Batch")] + [len(label) for label, _ in rows])
    header = ["Batch".ljust(label_width)] + [name.rjust(10) for name, _ in _TABLE_COLUMNS]
    lines = ["  ".join(header)]
    for label, metrics in rows:
        cells = [label.ljust(label_width)]
        for _, field_name in _TABLE_COLUMNS:
            cells.append(f"{getattr(metrics, field_name) * 100:.2f}".rjust(10))
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"
