#!/usr/bin/env python3
"""The optimization loop, replayed end to end from a bundled transcript.

Each iteration: plan every validation query with the current prompt, score
the batch, rank the remaining candidate examples, fold the selected one into
the prompt, repeat. With a recorded transcript the whole run is a pure
function of its inputs — rerunning it produces byte-identical artifacts.
"""

import tempfile
from pathlib import Path

from planloop.cli import main as cli_main
from planloop.fixtures import write_loop_fixture
from planloop.loop import RunStore, replay_run
from planloop.metrics import relative_improvement, render_metrics_table


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        inputs = write_loop_fixture(tmp / "inputs")
        store_root = tmp / "runs"

        code = cli_main([
            "run-loop",
            "--sandbox", str(inputs["archive"]),
            "--queries", str(inputs["queries"]),
            "--candidates", str(inputs["candidates"]),
            "--skeleton", str(inputs["skeleton"]),
            "--store", str(store_root),
            "--run-id", "walkthrough",
            "--mode", "rubric",
            "--max-iterations", "2",
            "--stub-transcript", str(inputs["transcript"]),
        ])
        assert code == 0

        store = RunStore(store_root, "walkthrough")
        records = store.iterations()
        print(f"\nstored {len(records)} iteration records in {store.ndjson_path.name}")
        for record in records:
            print(f"  iteration {record.index}: prompt {record.prompt_digest} "
                  f"-> selected {record.selected_plan_id} "
                  f"-> next prompt {record.next_prompt_digest}")

        rows = [(f"iter {r.index}", r.metrics) for r in records]
        print("\n" + render_metrics_table(rows))

        replayed = replay_run(store)
        print(f"\ndigest chain verified: final prompt carries "
              f"{len(replayed.final_skeleton.examples)} examples")

        first, last = records[0].metrics, records[-1].metrics
        if first.commonsense_micro:
            gain = relative_improvement(
                first.commonsense_micro * 100, last.commonsense_micro * 100
            )
            print(f"commonsense micro moved {first.commonsense_micro:.2%} -> "
                  f"{last.commonsense_micro:.2%} ({gain:+.1f}% relative)")


if __name__ == "__main__":
    main()
