"""Regenerate the benchmark error tables as CSV files.

    python scripts/run_tables.py --out results
    python scripts/run_tables.py --only disk --seeds 5

Each table goes to its own file; a short digest is printed as it runs.
"""

from __future__ import annotations

import argparse
import csv
import statistics
import time
from pathlib import Path

from frackansa import bench
from frackansa.cli import report_csv

DISK_MODES = {
    "N1": ({"node_mode": "disk_random", "clearance": 0.1, "shape_c": 0.10}, (140, 200, 400, 500)),
    "N2": ({"node_mode": "disk_rings", "ring_dr": 0.1, "shape_c": 0.15}, (140, 200, 400, 500)),
    "N3": ({"node_mode": "disk_rings", "ring_dr": 0.2, "shape_c": 0.15}, (200, 300, 400, 500)),
}


def line_table(out: Path) -> None:
    rep = bench.convergence_study("example1_1d", [1 / 10, 1 / 20, 1 / 25, 1 / 50])
    (out / "example1_convergence.csv").write_text(report_csv(rep, timing=True))
    for r in rep.rows:
        print(f"  1-D  h={r.spacing:.4f}  MAE {r.mae:.3e}")


def long_time_table(out: Path) -> None:
    rep = bench.long_time_study()
    with open(out / "example1_long_time.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "abs_err", "rel_err", "wall_ms"])
        for r in rep.rows:
            w.writerow([f"{r.time:g}", f"{r.mae:.6e}", f"{r.max_rel_err:.6e}", f"{r.wall_ms:.3f}"])
            print(f"  t={r.time:g}  rel {r.max_rel_err:.4e}  {r.wall_ms:.2f} ms")


def square_table(out: Path) -> None:
    rep = bench.convergence_study("example2_rect", [1 / 10, 1 / 15, 1 / 20, 1 / 25])
    (out / "example2_square.csv").write_text(report_csv(rep, timing=True))
    for r in rep.rows:
        print(f"  square  h={r.spacing:.4f}  MAE {r.mae:.3e}  max rel {r.max_rel_err:.3e}")


def disk_table(out: Path, seeds: int) -> None:
    with open(out / "example2_disk.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode", "n_nodes", "shape_c", "seed", "mae"])
        for mode, (ov, counts) in DISK_MODES.items():
            for n in counts:
                maes = []
                for seed in range(seeds):
                    res = bench.run_case("example2_disk", {**ov, "node_count": n}, seed=seed)
                    mae = res.report.rows[0].mae
                    maes.append(mae)
                    w.writerow([mode, n, ov["shape_c"], seed, f"{mae:.6e}"])
                print(f"  {mode} n={n}  median MAE {statistics.median(maes):.3e}")


def vector_table(out: Path) -> None:
    c1, c2 = bench.vector_vs_classical()
    for rep in (c1, c2):
        (out / f"vector_vs_classical_{rep.case_id}.csv").write_text(report_csv(rep, timing=True))
    for a, b in zip(c1.rows, c2.rows):
        print(f"  h={a.spacing:.4f}  C1 rel {a.max_rel_err:.4e}  C2 rel {b.max_rel_err:.4e}")


TABLES = {
    "line": line_table,
    "long-time": long_time_table,
    "square": square_table,
    "disk": disk_table,
    "vector": vector_table,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", choices=sorted(TABLES), action="append")
    ap.add_argument("--seeds", type=int, default=5, help="seeds per disk configuration")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or TABLES:
        t0 = time.perf_counter()
        print(f"[{name}]")
        fn = TABLES[name]
        fn(out, args.seeds) if name == "disk" else fn(out)
        print(f"  ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
