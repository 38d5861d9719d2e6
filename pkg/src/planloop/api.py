"""HTTP review gateway over a run store.

Read endpoints never mutate anything. POST /selection answers a pending
human-mode selection: 404 for unknown runs, 409 when nothing is awaiting an
answer (including repeats of an already-answered iteration), 422 when the
chosen plan is not among that iteration's candidates.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .loop import RunStore, SelectionRequest, list_runs


class GateClosed(RuntimeError):
    """The run ended while a selection was still pending."""


class SelectionGate:
    """Hands selection requests from the loop thread to HTTP reviewers.

    The loop blocks in `selector` until `submit` delivers an answer for the
    pending iteration; each iteration accepts exactly one answer.
    """

    def __init__(self):
        self._condition = threading.Condition()
        self._pending: SelectionRequest | None = None
        self._answer: tuple[str, str | None] | None = None
        self._answered: set[tuple[str, int]] = set()
        self._closed = False

    def selector(self, request: SelectionRequest) -> tuple[str, str | None]:
        with self._condition:
            self._pending = request
            self._answer = None
            self._condition.notify_all()
            while self._answer is None and not self._closed:
                self._condition.wait(timeout=0.5)
            if self._answer is None:
                raise GateClosed("gate closed before a selection arrived")
            answer = self._answer
            self._answered.add((request.run_id, request.iteration_index))
            self._pending = None
            self._answer = None
            return answer

    def close(self) -> None:
        with self._condition:
            self._closed = True
            self._condition.notify_all()

    def pending(self) -> SelectionRequest | None:
        with self._condition:
            return self._pending

    def was_answered(self, run_id: str, iteration_index: int) -> bool:
        with self._condition:
            return (run_id, iteration_index) in self._answered

    def answer(self, run_id: str, iteration_index: int, plan_id: str, note: str | None) -> str:
        """Returns "accepted", "duplicate", "not-awaiting", or "unknown-plan"."""
        with self._condition:
            if (run_id, iteration_index) in self._answered:
                return "duplicate"
            request = self._pending
            if (
                request is None
                or request.run_id != run_id
                or request.iteration_index != iteration_index
            ):
                return "not-awaiting"
            if self._answer is not None:
                return "duplicate"  # answered, loop thread not yet awake
            if plan_id not in {c.plan_id for c in request.candidates}:
                return "unknown-plan"
            self._answer = (plan_id, note)
            self._condition.notify_all()
            return "accepted"


class SelectionBody(BaseModel):
    run_id: str
    iteration_index: int
    plan_id: str
    note: str | None = None


def create_app(store_root: str | Path, gate: SelectionGate | None = None) -> FastAPI:
    store_root = Path(store_root)
    app = FastAPI(title="plan review gateway")
    # the review console may be served from any origin; the gateway itself
    # is single-user and unauthenticated by design
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    def store_for(run_id: str) -> RunStore:
        store = RunStore(store_root, run_id)
        if not store.ndjson_path.exists():
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}")
        return store

    def awaiting_for(run_id: str) -> dict | None:
        if gate is None:
            return None
        request = gate.pending()
        if request is None or request.run_id != run_id:
            return None
        return {
            "iteration_index": request.iteration_index,
            "candidate_plan_ids": [c.plan_id for c in request.candidates],
        }

    @app.get("/runs")
    def get_runs() -> list[dict]:
        out = []
        for run_id in list_runs(store_root):
            store = RunStore(store_root, run_id)
            records = store.iterations()
            out.append(
                {
                    "run_id": run_id,
                    "iterations": len(records),
                    "stopped": bool(records and records[-1].stopped),
                    "stop_reason": records[-1].stop_reason if records else None,
                    "awaiting": awaiting_for(run_id),
                }
            )
        return out

    @app.get("/runs/{run_id}/iterations")
    def get_iterations(run_id: str) -> list[dict]:
        store = store_for(run_id)
        return [r.to_dict() for r in store.iterations()]

    @app.get("/runs/{run_id}/metrics")
    def get_metrics(run_id: str) -> dict:
        store = store_for(run_id)
        return {
            "run_id": run_id,
            "series": [
                {
                    "index": r.index,
                    "stopped": r.stopped,
                    "stop_reason": r.stop_reason,
                    **r.metrics.to_dict(),
                }
                for r in store.iterations()
            ],
        }

    @app.get("/iterations/{iteration_id}/candidates")
    def get_candidates(iteration_id: str) -> dict:
        if ":" not in iteration_id:
            raise HTTPException(status_code=404, detail="iteration ids look like run:index")
        run_id, _, raw_index = iteration_id.rpartition(":")
        store = store_for(run_id)
        try:
            index = int(raw_index)
        except ValueError:
            raise HTTPException(status_code=404, detail=f"bad iteration index {raw_index!r}") from None
        payloads = store.load_candidate_payloads(index)
        pending = gate.pending() if gate is not None else None
        live = (
            pending is not None
            and pending.run_id == run_id
            and pending.iteration_index == index
        )
        if not payloads and not live:
            raise HTTPException(status_code=404, detail=f"no candidates for {iteration_id!r}")
        if live and not payloads:
            payloads = [c.to_dict() for c in pending.candidates]
        rankings = [r.to_dict() for r in pending.rankings] if live else []
        return {
            "iteration_id": iteration_id,
            "run_id": run_id,
            "index": index,
            "awaiting_selection": live,
            "candidates": payloads,
            "rankings": rankings,
        }

    @app.post("/selection")
    def post_selection(body: SelectionBody) -> dict:
        store_for(body.run_id)  # 404 for unknown runs
        if gate is None:
            raise HTTPException(status_code=409, detail="no run is awaiting a selection")
        status = gate.answer(body.run_id, body.iteration_index, body.plan_id, body.note)
        if status == "accepted":
            return {
                "status": "accepted",
                "run_id": body.run_id,
                "iteration_index": body.iteration_index,
                "plan_id": body.plan_id,
            }
        if status == "duplicate":
            raise HTTPException(
                status_code=409,
                detail=f"iteration {body.iteration_index} already has a selection",
            )
        if status == "unknown-plan":
            raise HTTPException(
                status_code=422,
                detail=f"{body.plan_id!r} is not a candidate for this iteration",
            )
        raise HTTPException(
            status_code=409,
            detail="this iteration is not awaiting a selection",
        )

    return app
