#!/usr/bin/env python3
"""Reference-data lifecycle: archive -> typed tables -> CSV -> back, plus
deterministic synthesis and lookups.

The sandbox is the planner's whole world: five tables (flights,
accommodations, restaurants, attractions, ground routes) that every plan is
checked against. This walk-through ingests the bundled archive, restructures
it as per-category CSV files, reads those back record-identically, and shows
the typed lookup surface the constraint engine uses.
"""

import tempfile
from pathlib import Path

from planloop.fixtures import demo_sandbox
from planloop.sandbox import (
    CATEGORIES,
    export_csv_tables,
    ingest_csv_tables,
    ingest_reference_archive,
    synthesize_sandbox,
    write_reference_archive,
)


def main() -> None:
    sandbox = demo_sandbox()
    print("demo sandbox tables:")
    for category in CATEGORIES:
        print(f"  {category:<15} {len(sandbox.table(category))} records")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        archive = write_reference_archive(sandbox, tmp / "archive.json")
        print(f"\nwrote archive: {archive.name} ({archive.stat().st_size} bytes)")

        restored = ingest_reference_archive(archive)
        csv_dir = tmp / "csv"
        files = export_csv_tables(restored, csv_dir)
        print(f"restructured into {len(files)} CSV files:")
        for f in sorted(csv_dir.iterdir()):
            print(f"  {f.name}: {len(f.read_text().splitlines()) - 1} rows")

        round_tripped = ingest_csv_tables(csv_dir)
        identical = all(
            round_tripped.table(c) == sandbox.table(c) for c in CATEGORIES
        )
        print(f"archive -> sandbox -> CSV -> sandbox record-identical: {identical}")

    print("\ntyped lookups:")
    flight = sandbox.flights[0]
    print(f"  first flight: {flight.flight_number} "
          f"{flight.origin_city} -> {flight.destination_city} at {flight.price:.2f}/person")
    hotel = sandbox.accommodations[0]
    print(f"  first hotel: {hotel.name} ({hotel.room_type}, sleeps "
          f"{hotel.maximum_occupancy}, min {hotel.minimum_nights} nights)")

    synth = synthesize_sandbox(7, {"flights": 4, "accommodations": 2,
                                   "restaurants": 3, "attractions": 2,
                                   "distances": 2})
    again = synthesize_sandbox(7, {"flights": 4, "accommodations": 2,
                                   "restaurants": 3, "attractions": 2,
                                   "distances": 2})
    print(f"\nsynthesized sandbox (seed 7): "
          f"{sum(len(synth.table(c)) for c in CATEGORIES)} records total, "
          f"deterministic: {all(synth.table(c) == again.table(c) for c in CATEGORIES)}")


if __name__ == "__main__":
    main()
