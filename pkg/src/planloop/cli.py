"""Command-line gateway: data plumbing, evaluation, ranking, the
optimization loop, and the HTTP review server."""

from __future__ import annotations

import argparse
import json
import sys
import threading
from datetime import datetime, timezone
from pathlib import Path

from .concept import build_skeleton, load_skeleton
from .constraints import evaluate, export_catalog
from .discriminators import (
    Candidate,
    candidate_from_dict,
    ground_truth_ordering,
    llm_rank,
    rubric_rank,
    score_query,
)
from .loop import RunConfig, RunStore, default_evaluation_code, run_loop
from .metrics import render_metrics_table
from .models import ModelClient, Transcript
from .plans import load_queries, parse_plan
from .sandbox import (
    CATEGORIES,
    Sandbox,
    export_csv_tables,
    ingest_csv_tables,
    ingest_reference_archive,
)

_USER_ERRORS = (ValueError, LookupError, RuntimeError, OSError)


def load_sandbox(path: str | Path) -> Sandbox:
    """Accept either a reference archive file or a directory of CSV tables."""
    path = Path(path)
    if path.is_dir():
        return ingest_csv_tables(path)
    return ingest_reference_archive(path)


def load_candidates(path: str | Path) -> list[Candidate]:
    rows = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(rows, list):
        raise ValueError("candidates file must hold a JSON array")
    return [candidate_from_dict(row) for row in rows]


def _make_model(args: argparse.Namespace) -> ModelClient:
    stub = getattr(args, "stub_transcript", None)
    record = getattr(args, "record_transcript", None)
    if stub:
        return ModelClient(mode="replay", transcript=Transcript.load(stub))
    if record:
        return ModelClient(mode="record", record_path=record)
    return ModelClient(mode="live")


def _pick_query(args: argparse.Namespace):
    queries = load_queries(args.queries)
    if not queries:
        raise ValueError(f"no queries in {args.queries}")
    if args.query_id is None:
        if len(queries) > 1:
            raise ValueError("several queries in the file; pass --query-id")
        return queries[0]
    for query in queries:
        if query.id == args.query_id:
            return query
    raise ValueError(f"no query with id {args.query_id!r}")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- subcommands ------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace) -> int:
    sandbox = ingest_reference_archive(args.archive)
    written = export_csv_tables(sandbox, args.out, include_empty=args.include_empty)
    for category in CATEGORIES:
        print(f"{category}: {len(sandbox.table(category))} records")
    print(f"wrote {len(written)} CSV files to {args.out}")
    return 0


def cmd_export_csv(args: argparse.Namespace) -> int:
    sandbox = load_sandbox(args.sandbox)
    written = export_csv_tables(sandbox, args.out, include_empty=args.include_empty)
    for path in written:
        print(path)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    sandbox = load_sandbox(args.sandbox)
    query = _pick_query(args)
    plan = parse_plan(Path(args.plan).read_text(encoding="utf-8"), query_id=query.id)
    report = evaluate(plan, query, sandbox)
    if args.json:
        _emit(report.to_dict(), args.out)
        return 0
    for outcome in report.outcomes:
        print(f"{outcome.constraint_id:32} {outcome.status:15} {outcome.message}")
    cost = "n/a" if report.total_cost is None else f"{report.total_cost:g}"
    print(f"total cost: {cost}")
    print(f"final: {'pass' if report.final_pass else 'fail'}")
    return 0


def cmd_score_query(args: argparse.Namespace) -> int:
    queries = load_queries(args.queries)
    if args.query_id is not None:
        queries = [q for q in queries if q.id == args.query_id]
        if not queries:
            raise ValueError(f"no query with id {args.query_id!r}")
    for query in queries:
        print(json.dumps(score_query(query).to_dict(), sort_keys=True))
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    candidates = load_candidates(args.candidates)
    if args.method == "rubric":
        ranking = rubric_rank(candidates)
    else:
        model = _make_model(args)
        code = default_evaluation_code()
        ranking = llm_rank(candidates, code, model, repeats=args.repeats)
    payload = {"generated_at": _timestamp(), "ranking": ranking.to_dict()}
    _emit(payload, args.out)
    return 0


def cmd_ground_truth(args: argparse.Namespace) -> int:
    sandbox = load_sandbox(args.sandbox)
    candidates = load_candidates(args.candidates)
    skeleton = load_skeleton(args.skeleton)
    queries = load_queries(args.queries)
    model = _make_model(args)
    ordering = ground_truth_ordering(
        candidates,
        skeleton,
        queries,
        sandbox,
        model,
        runs=args.runs,
        metric=args.metric,
    )
    payload = {"generated_at": _timestamp(), "ordering": ordering.to_dict()}
    _emit(payload, args.out)
    return 0


def cmd_build_prompt(args: argparse.Namespace) -> int:
    if args.skeleton:
        skeleton = load_skeleton(args.skeleton)
    elif args.sandbox:
        sandbox = load_sandbox(args.sandbox)
        skeleton = build_skeleton(sandbox, max_reference_rows=args.max_rows)
    else:
        raise ValueError("pass --sandbox or --skeleton")
    if args.save_skeleton:
        skeleton.save(args.save_skeleton)
    text = skeleton.render()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_run_loop(args: argparse.Namespace) -> int:
    sandbox = load_sandbox(args.sandbox)
    queries = load_queries(args.queries)
    candidates = load_candidates(args.candidates)
    if args.skeleton:
        skeleton = load_skeleton(args.skeleton)
    else:
        skeleton = build_skeleton(sandbox)
    model = _make_model(args)
    config = RunConfig(
        run_id=args.run_id,
        selection_mode=args.mode,
        threshold=args.threshold,
        threshold_metric=args.threshold_metric,
        max_iterations=args.max_iterations,
        llm_repeats=args.llm_repeats,
    )
    store = RunStore(args.store, args.run_id)

    if args.mode == "human":
        if args.serve_port is None:
            raise ValueError("human mode needs --serve-port so a reviewer can answer")
        return _run_with_gateway(args, config, skeleton, candidates, queries, sandbox, model, store)

    result = run_loop(config, skeleton, candidates, queries, sandbox, model, store=store)
    rows = [(f"iteration {r.index}", r.metrics) for r in result.records]
    sys.stdout.write(render_metrics_table(rows))
    last = result.records[-1]
    print(f"stopped: {last.stop_reason or 'no'} after {len(result.records)} iterations")
    print(f"store: {store.run_dir}")
    return 0


def _run_with_gateway(args, config, skeleton, candidates, queries, sandbox, model, store) -> int:
    import uvicorn

    from .api import SelectionGate, create_app

    gate = SelectionGate()
    app = create_app(args.store, gate=gate)
    errors: list[BaseException] = []

    def worker() -> None:
        try:
            run_loop(
                config, skeleton, candidates, queries, sandbox, model,
                store=store, selector=gate.selector,
            )
        except BaseException as exc:  # noqa: BLE001 - surfaced after serving
            errors.append(exc)
        finally:
            gate.close()

    thread = threading.Thread(target=worker, name="run-loop", daemon=True)
    thread.start()
    print(f"serving review gateway on port {args.serve_port}; run {config.run_id} in progress")
    uvicorn.run(app, host=args.host, port=args.serve_port, log_level="warning")
    if errors:
        raise errors[0]
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    store = RunStore(args.store, args.run_id)
    records = store.iterations()
    if not records:
        raise ValueError(f"run {args.run_id!r} has no iterations")
    if args.format == "json":
        payload = {
            "run_id": args.run_id,
            "series": [
                {"index": r.index, "stopped": r.stopped, "stop_reason": r.stop_reason,
                 **r.metrics.to_dict()}
                for r in records
            ],
        }
        _emit(payload, None)
        return 0
    rows = [(f"iteration {r.index}", r.metrics) for r in records]
    sys.stdout.write(render_metrics_table(rows))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(args.store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_catalog(args: argparse.Namespace) -> int:
    _emit({"constraints": export_catalog()}, args.out)
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planloop",
        description="Constraint-aware travel-plan evaluation and prompt optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a reference archive and write CSV tables")
    p.add_argument("archive", help="reference archive JSON file")
    p.add_argument("--out", required=True, help="directory for the CSV tables")
    p.add_argument("--include-empty", action="store_true",
                   help="also write header-only files for empty tables")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("export-csv", help="write a sandbox out as CSV tables")
    p.add_argument("--sandbox", required=True, help="archive file or CSV directory")
    p.add_argument("--out", required=True)
    p.add_argument("--include-empty", action="store_true")
    p.set_defaults(fn=cmd_export_csv)

    p = sub.add_parser("evaluate", help="evaluate one plan against one query")
    p.add_argument("--sandbox", required=True)
    p.add_argument("--queries", required=True, help="query file (JSON or NDJSON)")
    p.add_argument("--query-id", help="which query, when the file holds several")
    p.add_argument("--plan", required=True, help="plan text file")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.add_argument("--out", help="write output to a file instead of stdout")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("score-query", help="difficulty rubric breakdown per query")
    p.add_argument("--queries", required=True)
    p.add_argument("--query-id")
    p.set_defaults(fn=cmd_score_query)

    p = sub.add_parser("rank", help="rank candidate examples")
    p.add_argument("--candidates", required=True, help="candidates JSON file")
    p.add_argument("--method", choices=("rubric", "llm"), default="rubric")
    p.add_argument("--repeats", type=int, default=10, help="scoring rounds per plan")
    p.add_argument("--stub-transcript", help="replay model calls from this transcript")
    p.add_argument("--record-transcript", help="record live model calls to this file")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_rank)

    p = sub.add_parser("ground-truth",
                       help="order candidates by measured validation fitness")
    p.add_argument("--sandbox", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--skeleton", required=True)
    p.add_argument("--queries", required=True, help="validation query file")
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--metric", default="commonsense-micro",
                   choices=("commonsense-micro", "commonsense-macro", "final"))
    p.add_argument("--stub-transcript")
    p.add_argument("--record-transcript")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_ground_truth)

    p = sub.add_parser("build-prompt", help="assemble the planner prompt")
    p.add_argument("--sandbox", help="archive file or CSV directory")
    p.add_argument("--skeleton", help="load an existing skeleton instead")
    p.add_argument("--max-rows", type=int, help="cap reference rows per table")
    p.add_argument("--save-skeleton", help="also save the skeleton JSON here")
    p.add_argument("--out", help="write the prompt text here instead of stdout")
    p.set_defaults(fn=cmd_build_prompt)

    p = sub.add_parser("run-loop", help="run the example-selection loop")
    p.add_argument("--sandbox", required=True)
    p.add_argument("--queries", required=True, help="validation query file")
    p.add_argument("--candidates", required=True)
    p.add_argument("--skeleton", help="skeleton JSON; built from the sandbox if absent")
    p.add_argument("--store", required=True, help="root directory for run artifacts")
    p.add_argument("--run-id", required=True)
    p.add_argument("--mode", choices=("rubric", "llm", "hybrid", "human"), default="rubric")
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--threshold-metric", default="final",
                   choices=("final", "commonsense-micro", "commonsense-macro"))
    p.add_argument("--max-iterations", type=int, default=3)
    p.add_argument("--llm-repeats", type=int, default=10)
    p.add_argument("--stub-transcript")
    p.add_argument("--record-transcript")
    p.add_argument("--serve-port", type=int, help="human mode: gateway port")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=cmd_run_loop)

    p = sub.add_parser("metrics", help="per-iteration metrics for a stored run")
    p.add_argument("--store", required=True)
    p.add_argument("--run-id", required=True)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("serve", help="serve the review gateway over a run store")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8640)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("catalog", help="print the constraint catalog as JSON")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_catalog)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
