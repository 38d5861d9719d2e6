#!/usr/bin/env python3
"""Human-in-the-loop selection over HTTP: the gateway end to end.

A human-mode run pauses after ranking and waits for a reviewer. This demo
starts such a run with its embedded gateway, then plays the reviewer over
plain HTTP: list runs, inspect the awaiting iteration's candidate board
(reports, rubric breakdowns, rankings), submit a selection, and show that
the finished run recorded exactly that choice.
"""

import json
import socket
import tempfile
import threading
import time
import urllib.error
import urllib.request
from pathlib import Path

from planloop.cli import main as cli_main
from planloop.fixtures import write_loop_fixture
from planloop.loop import RunStore


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def get(base, path):
    with urllib.request.urlopen(base + path, timeout=5) as resp:
        return json.loads(resp.read())


def post(base, path, payload):
    req = urllib.request.Request(
        base + path,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=5) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        inputs = write_loop_fixture(tmp / "inputs")
        store_root = tmp / "runs"
        port = free_port()
        base = f"http://127.0.0.1:{port}"

        runner = threading.Thread(
            target=cli_main,
            args=([
                "run-loop",
                "--sandbox", str(inputs["archive"]),
                "--queries", str(inputs["queries"]),
                "--candidates", str(inputs["candidates"]),
                "--skeleton", str(inputs["skeleton"]),
                "--store", str(store_root),
                "--run-id", "review",
                "--mode", "human",
                "--max-iterations", "1",
                "--stub-transcript", str(inputs["transcript"]),
                "--serve-port", str(port),
            ],),
            daemon=True,
        )
        runner.start()

        deadline = time.monotonic() + 15
        awaiting = None
        while time.monotonic() < deadline:
            try:
                rows = get(base, "/runs")
                if rows and rows[0].get("awaiting"):
                    awaiting = rows[0]["awaiting"]
                    break
            except (urllib.error.URLError, ConnectionError):
                pass
            time.sleep(0.1)
        assert awaiting, "run never reached the awaiting-selection state"
        index = awaiting["iteration_index"]
        print(f"run 'review' is awaiting a selection for iteration {index}")
        print(f"candidates on offer: {awaiting['candidate_plan_ids']}")

        board = get(base, f"/iterations/review:{index}/candidates")
        ranking = board["rankings"][0]
        print(f"\nrubric ranking ({ranking['method']}):")
        for plan_id, score in zip(ranking["ordered_plan_ids"], ranking["scores"]):
            entry = next(c for c in board["candidates"] if c["plan_id"] == plan_id)
            fails = [o["constraint_id"] for o in entry["report"]["outcomes"]
                     if o["status"] == "fail"]
            print(f"  {plan_id}: difficulty {score:.0f}, "
                  f"plan {'fails ' + ', '.join(fails) if fails else 'passes every check'}")

        chosen = ranking["ordered_plan_ids"][1]
        status, body = post(base, "/selection", {
            "run_id": "review", "iteration_index": index,
            "plan_id": chosen, "note": "mid-difficulty example reads clearest",
        })
        print(f"\nPOST /selection of {chosen!r} -> HTTP {status} ({body['status']})")

        status, body = post(base, "/selection", {
            "run_id": "review", "iteration_index": index, "plan_id": chosen,
        })
        print(f"posting again -> HTTP {status} ({body['detail']})")

        runner.join(timeout=15)
        record = RunStore(store_root, "review").iterations()[0]
        print(f"\nstored iteration record: selected {record.selected_plan_id!r} "
              f"with note {record.reviewer_note!r}")


if __name__ == "__main__":
    main()
