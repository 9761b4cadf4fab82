#!/usr/bin/env python3
"""Runs a small training sweep and recomputes plot.csv aggregates from metrics.csv."""
import csv
import statistics
import subprocess
import sys
import tempfile
from collections import defaultdict
from pathlib import Path


def main() -> int:
    cli = sys.argv[1]
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "run"
        subprocess.run(
            [cli, "train", "--episodes", "60", "--seeds", "1,2,3,4", "--set",
             "experiment.eval_every=20", "--out", str(out)],
            check=True,
        )
        per_point = defaultdict(lambda: defaultdict(list))
        with open(out / "metrics.csv", newline="") as f:
            for row in csv.DictReader(f):
                key = (row["condition"], int(row["episode"]))
                for col in ("success_rate", "mean_return", "mean_length"):
                    per_point[key][col].append(float(row[col]))

        columns = {"success": "success_rate", "return": "mean_return", "length": "mean_length"}
        checked = 0
        with open(out / "plot.csv", newline="") as f:
            for row in csv.DictReader(f):
                values = per_point[(row["condition"], int(row["episode"]))]
                for prefix, col in columns.items():
                    xs = values[col]
                    mean, std = statistics.fmean(xs), statistics.pstdev(xs)
                    got_mean = float(row[f"{prefix}_mean"])
                    got_std = float(row[f"{prefix}_std"])
                    if abs(got_mean - mean) > 1e-9 or abs(got_std - std) > 1e-9:
                        print(f"mismatch at {row['episode']} {prefix}: "
                              f"({got_mean}, {got_std}) vs ({mean}, {std})")
                        return 1
                    checked += 1
        if checked != 3 * 3:
            print(f"expected 9 aggregate cells, checked {checked}")
            return 1
    print(f"{checked} aggregate cells match")
    return 0


if __name__ == "__main__":
    sys.exit(main())
