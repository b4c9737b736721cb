#!/usr/bin/env python3
"""Run every config under scripts/configs/ through the CLI and digest the
results.

    python3 scripts/run_all_verifications.py [--out DIR] [--threads N]

Each config becomes one CSV in the output directory (default: a fresh
`verification_runs/` next to this script).  The digest prints the headline
row of each experiment so a full sweep can be eyeballed in one screen.
"""

import argparse
import csv
import json
import pathlib
import subprocess
import sys

HERE = pathlib.Path(__file__).resolve().parent

# the row that summarises each experiment best, by command
HEADLINE = {
    "entropy": ("bowen_entropy", "spanning_entropy"),
    "birkhoff": ("birkhoff_average",),
    "classify": ("classification",),
    "construct": ("construction_gap", "oscillation_gap", "within_budget"),
    "verify-thm-a": ("max_scaled_deviation",),
    "verify-thm-b": ("entropy_vs_metric_gap", "not_generic_count"),
    "verify-irregular": ("entropy_fraction_of_max",),
    "verify-inclusions": ("generic_inclusion_breaks", "irregular_inclusion_breaks",
                          "foreign_rejected_count"),
}


def run_one(config: pathlib.Path, out: pathlib.Path, threads: int) -> int:
    cmd = ["ergode", "run", str(config), "--out", str(out)]
    if threads > 1:
        cmd += ["--threads", str(threads)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        print(f"  exit {proc.returncode}: {proc.stderr.strip().splitlines()[-1]}")
    return proc.returncode


def digest(config: pathlib.Path, out: pathlib.Path) -> None:
    cfg = json.loads(config.read_text())
    eid = cfg["experiment_id"]
    wanted = HEADLINE.get(cfg["command"], ())
    path = out / f"{eid}.csv"
    if not path.exists():
        print(f"  {eid}: no report written")
        return
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    qi, vi = header.index("quantity"), header.index("value")
    for row in body:
        if row[qi] in wanted:
            print(f"  {eid}: {row[qi]} = {row[vi]}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(HERE / "verification_runs"))
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    configs = sorted((HERE / "configs").glob("*.json"))
    if not configs:
        print("no configs found", file=sys.stderr)
        return 1
    failures = 0
    for config in configs:
        print(config.name)
        code = run_one(config, out, args.threads)
        if code == 0:
            digest(config, out)
        else:
            failures += 1
    print(f"\n{len(configs) - failures}/{len(configs)} experiments completed; "
          f"reports in {out}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
