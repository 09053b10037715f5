"""Plume runs for the two application cases with moment diagnostics.

Writes the nodal fields (``x,y,t,u``) and a per-time diagnostics table:
nodal mass, centre of mass, second moments along the diagonals and the
concentration at a probe point.

    python scripts/plume_diagnostics.py --out results/plumes
    python scripts/plume_diagnostics.py --case app_discrete --large
"""

from __future__ import annotations

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from frackansa import bench
from frackansa.cli import write_fields

PROBES = {"app_continuous": (1.1, 1.0), "app_discrete": (14.0, 20.0)}


def diagnostics(res: bench.CaseResult, probe: tuple[float, float]) -> list[dict]:
    nodes = res.nodes
    at_probe = res.solver.snapshot(np.array([probe]), res.snapshot.times).values[:, 0]
    rows = []
    for k, t in enumerate(res.snapshot.times):
        u = res.snapshot.values[k, : nodes.M]
        cx, cy = bench.center_of_mass(nodes.interior, u)
        rows.append({
            "t": float(t),
            "nodal_sum": float(u.sum()),
            "com_x": float(cx),
            "com_y": float(cy),
            "m_pi4": bench.second_moment(nodes.interior, u, math.pi / 4),
            "m_3pi4": bench.second_moment(nodes.interior, u, 3 * math.pi / 4),
            "u_probe": float(at_probe[k]),
            "boundary_max": float(np.abs(res.snapshot.values[k, nodes.M:]).max()),
        })
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--case", choices=sorted(PROBES), action="append")
    ap.add_argument("--out", default="results/plumes")
    ap.add_argument("--node-count", type=int, help="override the disk node count")
    ap.add_argument("--large", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for cid in args.case or sorted(PROBES):
        ov = {"node_count": args.node_count} if args.node_count and cid == "app_continuous" else {}
        res = bench.run_case(cid, ov, large=args.large)
        tag = f"{cid}_{len(res.nodes)}"
        write_fields(out / f"{tag}_fields.csv", res.snapshot)
        rows = diagnostics(res, PROBES[cid])
        with open(out / f"{tag}_diagnostics.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows({k: f"{v:.10g}" for k, v in r.items()} for r in rows)
        print(f"{tag}: {res.build_ms / 1e3:.1f} s build, {res.propagate_ms / 1e3:.1f} s propagate")
        for r in rows:
            print("  " + "  ".join(f"{k} {v:.4g}" for k, v in r.items()))


if __name__ == "__main__":
    main()
