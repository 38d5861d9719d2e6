"""The example-selection loop and its on-disk run store.

Each iteration renders the current prompt, plans the whole validation split,
scores the batch, and either stops (threshold reached, iteration budget
spent, or candidate pool empty) or selects one candidate plan to append as a
worked example for the next round. Every iteration is appended to
`run.ndjson` as one canonical JSON line, with no timestamps or other
machine-local state, so identical inputs reproduce identical bytes.
"""

from __future__ import annotations

import inspect
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

from . import constraints as _constraints_module
from .concept import SkeletonPrompt, load_skeleton, skeleton_from_dict
from .discriminators import (
    Candidate,
    Ranking,
    UnsupportedCityCount,
    UnsupportedDuration,
    candidate_from_dict,
    hybrid_select,
    llm_rank,
    ranking_from_dict,
    rubric_rank,
    rubric_score,
)
from .constraints import evaluate
from .metrics import BatchMetrics, batch_metrics, metrics_from_dict
from .models import ModelClient, ModelError
from .plans import Query, extract_features
from .planner import generate_reports
from .sandbox import Sandbox

SELECTION_MODES = ("rubric", "llm", "hybrid", "human")
THRESHOLD_METRICS = ("final", "commonsense-micro", "commonsense-macro")


class RunExists(FileExistsError):
    """The store already holds a run with this id."""


class CorruptRecord(ValueError):
    """A stored run line failed to parse or verify. Carries the line number."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"run.ndjson line {line}: {reason}")


class InvalidSelection(ValueError):
    """A reviewer chose a plan that is not in the current candidate pool."""


class NoSelector(RuntimeError):
    """Human selection mode was requested without a selection callback."""


@dataclass(frozen=True)
class RunConfig:
    run_id: str
    selection_mode: str
    threshold: float
    max_iterations: int
    threshold_metric: str = "final"
    llm_repeats: int = 10
    validation_query_ids: tuple[str, ...] = ()
    candidate_plan_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.run_id or "/" in self.run_id or ":" in self.run_id:
            raise ValueError("run_id must be non-empty and free of '/' and ':'")
        if self.selection_mode not in SELECTION_MODES:
            raise ValueError(f"selection_mode must be one of {SELECTION_MODES}")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError("threshold must be within [0, 1]")
        if self.threshold_metric not in THRESHOLD_METRICS:
            raise ValueError(f"threshold_metric must be one of {THRESHOLD_METRICS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.llm_repeats < 1:
            raise ValueError("llm_repeats must be >= 1")

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "selection_mode": self.selection_mode,
            "threshold": self.threshold,
            "threshold_metric": self.threshold_metric,
            "max_iterations": self.max_iterations,
            "llm_repeats": self.llm_repeats,
            "validation_query_ids": list(self.validation_query_ids),
            "candidate_plan_ids": list(self.candidate_plan_ids),
        }


def config_from_dict(raw: dict) -> RunConfig:
    return RunConfig(
        run_id=raw["run_id"],
        selection_mode=raw["selection_mode"],
        threshold=float(raw["threshold"]),
        threshold_metric=raw["threshold_metric"],
        max_iterations=int(raw["max_iterations"]),
        llm_repeats=int(raw["llm_repeats"]),
        validation_query_ids=tuple(raw["validation_query_ids"]),
        candidate_plan_ids=tuple(raw["candidate_plan_ids"]),
    )


@dataclass(frozen=True)
class IterationRecord:
    index: int
    prompt_digest: str
    metrics: BatchMetrics
    rankings: tuple[Ranking, ...]
    selected_plan_id: str | None
    selected_example: tuple[str, str] | None
    reviewer_note: str | None
    stopped: bool
    stop_reason: str | None
    next_prompt_digest: str | None

    def to_dict(self) -> dict:
        return {
            "type": "iteration",
            "index": self.index,
            "prompt_digest": self.prompt_digest,
            "metrics": self.metrics.to_dict(),
            "rankings": [r.to_dict() for r in self.rankings],
            "selected_plan_id": self.selected_plan_id,
            "selected_example": list(self.selected_example) if self.selected_example else None,
            "reviewer_note": self.reviewer_note,
            "stopped": self.stopped,
            "stop_reason": self.stop_reason,
            "next_prompt_digest": self.next_prompt_digest,
        }


def iteration_from_dict(raw: dict) -> IterationRecord:
    return IterationRecord(
        index=raw["index"],
        prompt_digest=raw["prompt_digest"],
        metrics=metrics_from_dict(raw["metrics"]),
        rankings=tuple(ranking_from_dict(r) for r in raw["rankings"]),
        selected_plan_id=raw["selected_plan_id"],
        selected_example=tuple(raw["selected_example"]) if raw["selected_example"] else None,
        reviewer_note=raw["reviewer_note"],
        stopped=raw["stopped"],
        stop_reason=raw["stop_reason"],
        next_prompt_digest=raw["next_prompt_digest"],
    )


def _canonical_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


class RunStore:
    """One run's artifacts under <root>/<run_id>/."""

    def __init__(self, root: str | Path, run_id: str):
        self.root = Path(root)
        self.run_id = run_id
        self.run_dir = self.root / run_id

    @property
    def ndjson_path(self) -> Path:
        return self.run_dir / "run.ndjson"

    def initialize(self, config: RunConfig, skeleton: SkeletonPrompt) -> None:
        if self.ndjson_path.exists():
            raise RunExists(str(self.run_dir))
        (self.run_dir / "prompts").mkdir(parents=True, exist_ok=True)
        (self.run_dir / "candidates").mkdir(parents=True, exist_ok=True)
        (self.run_dir / "config.json").write_text(
            json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        skeleton.save(self.run_dir / "skeleton.json")
        self.ndjson_path.write_text("", encoding="utf-8")

    def append(self, record: dict) -> None:
        with self.ndjson_path.open("a", encoding="utf-8") as fh:
            fh.write(_canonical_line(record))

    def save_prompt(self, digest: str, text: str) -> Path:
        path = self.run_dir / "prompts" / f"{digest}.txt"
        if not path.exists():
            path.write_text(text, encoding="utf-8")
        return path

    def load_prompt(self, digest: str) -> str:
        return (self.run_dir / "prompts" / f"{digest}.txt").read_text(encoding="utf-8")

    def save_candidates(
        self, index: int, candidates: Sequence[Candidate], sandbox: Sandbox | None = None
    ) -> Path:
        """Snapshot the pool; with a sandbox, each entry also carries the
        candidate's own evaluation report and rubric breakdown for reviewers."""
        entries = []
        for candidate in candidates:
            entry = candidate.to_dict()
            try:
                entry["rubric"] = rubric_score(
                    extract_features(candidate.query), candidate.query.id
                ).to_dict()
            except (UnsupportedDuration, UnsupportedCityCount):
                pass
            if sandbox is not None:
                entry["report"] = evaluate(candidate.plan, candidate.query, sandbox).to_dict()
            entries.append(entry)
        path = self.run_dir / "candidates" / f"{index}.json"
        path.write_text(
            json.dumps(entries, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return path

    def load_candidates(self, index: int) -> list[Candidate]:
        return [candidate_from_dict(raw) for raw in self.load_candidate_payloads(index)]

    def load_candidate_payloads(self, index: int) -> list[dict]:
        path = self.run_dir / "candidates" / f"{index}.json"
        if not path.exists():
            return []
        return json.loads(path.read_text(encoding="utf-8"))

    def load_config(self) -> RunConfig:
        raw = json.loads((self.run_dir / "config.json").read_text(encoding="utf-8"))
        return config_from_dict(raw)

    def load_skeleton(self) -> SkeletonPrompt:
        return load_skeleton(self.run_dir / "skeleton.json")

    def raw_records(self) -> list[dict]:
        if not self.ndjson_path.exists():
            return []
        records = []
        for i, line in enumerate(self.ndjson_path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptRecord(i, f"not valid JSON: {exc}") from exc
            if not isinstance(record, dict) or "type" not in record:
                raise CorruptRecord(i, "record must be an object with a type")
            records.append(record)
        return records

    def iterations(self) -> list[IterationRecord]:
        out = []
        for i, record in enumerate(self.raw_records(), 1):
            if record["type"] != "iteration":
                continue
            try:
                out.append(iteration_from_dict(record))
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptRecord(i, f"bad iteration record: {exc}") from exc
        return out


def list_runs(root: str | Path) -> list[str]:
    root = Path(root)
    if not root.exists():
        return []
    return sorted(
        p.name for p in root.iterdir() if p.is_dir() and (p / "run.ndjson").exists()
    )


@dataclass(frozen=True)
class ReplayedRun:
    config: RunConfig
    initial_skeleton: SkeletonPrompt
    final_skeleton: SkeletonPrompt
    records: tuple[IterationRecord, ...]


def replay_run(store: RunStore) -> ReplayedRun:
    """Rebuild a run's prompt evolution from disk, verifying the digest chain."""
    config = store.load_config()
    skeleton = store.load_skeleton()
    initial = skeleton
    records = store.iterations()
    for line, record in enumerate(records, 1):
        if record.prompt_digest != skeleton.digest():
            raise CorruptRecord(
                line,
                f"prompt digest {record.prompt_digest} does not match the "
                f"replayed skeleton ({skeleton.digest()})",
            )
        if record.selected_example is not None:
            skeleton = skeleton.with_example(*record.selected_example)
            if record.next_prompt_digest != skeleton.digest():
                raise CorruptRecord(
                    line,
                    f"next prompt digest {record.next_prompt_digest} does not "
                    f"match the appended example ({skeleton.digest()})",
                )
    return ReplayedRun(
        config=config,
        initial_skeleton=initial,
        final_skeleton=skeleton,
        records=tuple(records),
    )


@dataclass(frozen=True)
class SelectionRequest:
    run_id: str
    iteration_index: int
    candidates: tuple[Candidate, ...]
    rankings: tuple[Ranking, ...]


Selector = Callable[[SelectionRequest], tuple[str, str | None]]


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    records: tuple[IterationRecord, ...]
    final_skeleton: SkeletonPrompt


def default_evaluation_code() -> str:
    """What the scoring model gets shown as 'the checker': the engine source."""
    return inspect.getsource(_constraints_module)


def _threshold_value(metrics: BatchMetrics, metric: str) -> float:
    if metric == "final":
        return metrics.final_rate
    if metric == "commonsense-micro":
        return metrics.commonsense_micro
    return metrics.commonsense_macro


def run_loop(
    config: RunConfig,
    skeleton: SkeletonPrompt,
    candidates: Sequence[Candidate],
    validation_queries: Sequence[Query],
    sandbox: Sandbox,
    model: ModelClient,
    store: RunStore | None = None,
    selector: Selector | None = None,
    evaluation_code: str | None = None,
) -> RunResult:
    """Run up to max_iterations rounds of evaluate-rank-select-refine."""
    if not validation_queries:
        raise ValueError("the loop needs at least one validation query")
    if config.selection_mode == "human" and selector is None:
        raise NoSelector("human selection mode needs a selector callback")
    config = replace(
        config,
        validation_query_ids=tuple(q.id for q in validation_queries),
        candidate_plan_ids=tuple(c.plan_id for c in candidates),
    )
    if store is not None:
        store.initialize(config, skeleton)
    if evaluation_code is None:
        evaluation_code = default_evaluation_code()

    pool = list(candidates)
    records: list[IterationRecord] = []

    def emit(record: IterationRecord) -> None:
        records.append(record)
        if store is not None:
            store.append(record.to_dict())

    for index in range(1, config.max_iterations + 1):
        prompt_text = skeleton.render()
        digest = skeleton.digest()
        if store is not None:
            store.save_prompt(digest, prompt_text)
        try:
            reports = generate_reports(
                prompt_text, validation_queries, sandbox, model, model_errors="raise"
            )
        except ModelError as exc:
            if store is not None:
                store.append(
                    {"type": "error", "index": index, "stage": "generate", "message": str(exc)}
                )
            raise
        metrics = batch_metrics(reports)

        if _threshold_value(metrics, config.threshold_metric) >= config.threshold:
            emit(
                IterationRecord(
                    index=index,
                    prompt_digest=digest,
                    metrics=metrics,
                    rankings=(),
                    selected_plan_id=None,
                    selected_example=None,
                    reviewer_note=None,
                    stopped=True,
                    stop_reason="threshold-met",
                    next_prompt_digest=None,
                )
            )
            break

        if not pool:
            emit(
                IterationRecord(
                    index=index,
                    prompt_digest=digest,
                    metrics=metrics,
                    rankings=(),
                    selected_plan_id=None,
                    selected_example=None,
                    reviewer_note=None,
                    stopped=True,
                    stop_reason="candidates-exhausted",
                    next_prompt_digest=None,
                )
            )
            break

        try:
            rankings = _rank_pool(config, pool, evaluation_code, model)
        except ModelError as exc:
            if store is not None:
                store.append(
                    {"type": "error", "index": index, "stage": "rank", "message": str(exc)}
                )
            raise
        if store is not None:
            store.save_candidates(index, pool, sandbox)

        reviewer_note: str | None = None
        if config.selection_mode == "human":
            request = SelectionRequest(
                run_id=config.run_id,
                iteration_index=index,
                candidates=tuple(pool),
                rankings=rankings,
            )
            selected_id, reviewer_note = selector(request)
            if selected_id not in {c.plan_id for c in pool}:
                raise InvalidSelection(f"{selected_id!r} is not in the candidate pool")
        else:
            selected_id = hybrid_select(rankings)

        selected = next(c for c in pool if c.plan_id == selected_id)
        pool.remove(selected)
        example = (selected.request_text, selected.plan_text)
        skeleton = skeleton.with_example(*example)
        next_digest = skeleton.digest()
        if store is not None:
            store.save_prompt(next_digest, skeleton.render())

        stopping = index == config.max_iterations
        emit(
            IterationRecord(
                index=index,
                prompt_digest=digest,
                metrics=metrics,
                rankings=rankings,
                selected_plan_id=selected_id,
                selected_example=example,
                reviewer_note=reviewer_note,
                stopped=stopping,
                stop_reason="max-iterations" if stopping else None,
                next_prompt_digest=next_digest,
            )
        )

    return RunResult(config=config, records=tuple(records), final_skeleton=skeleton)


def _rank_pool(
    config: RunConfig,
    pool: Sequence[Candidate],
    evaluation_code: str,
    model: ModelClient,
) -> tuple[Ranking, ...]:
    if config.selection_mode in ("rubric", "human"):
        return (rubric_rank(pool),)
    if config.selection_mode == "llm":
        if len(pool) == 1:
            return (rubric_rank(pool),)
        return (llm_rank(pool, evaluation_code, model, repeats=config.llm_repeats),)
    rankings: list[Ranking] = [rubric_rank(pool)]
    if len(pool) > 1:
        rankings.append(llm_rank(pool, evaluation_code, model, repeats=config.llm_repeats))
    return tuple(rankings)
