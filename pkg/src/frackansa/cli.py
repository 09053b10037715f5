"""Command line: ``run``, ``convergence`` and ``list-cases``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import bench
from .config import ConfigError, RunConfig, load_config, parse_number

log = logging.getLogger("frackansa")

NUM = "{:.15e}"


def _fmt_rate(rate) -> str:
    if rate is None:
        return ""
    return "undefined" if not math.isfinite(rate) else NUM.format(rate)


def write_fields(path: Path, snapshot) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "t", "u"])
        for k, t in enumerate(snapshot.times):
            for (x, y), u in zip(snapshot.points, snapshot.values[k]):
                w.writerow([NUM.format(x), NUM.format(y), NUM.format(t), NUM.format(u)])


def report_csv(report: bench.ErrorReport | None, timing: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["spacing", "n_nodes", "mae", "max_rel_err", "rate", "wall_ms"])
    for r in report.rows if report else ():
        w.writerow([NUM.format(r.spacing), r.n_nodes, NUM.format(r.mae),
                    NUM.format(r.max_rel_err), _fmt_rate(r.rate),
                    f"{r.wall_ms:.3f}" if timing else ""])
    return buf.getvalue()


def summary_text(res: bench.CaseResult, seed: int) -> str:
    prop, system = res.solver.propagator, res.solver.system
    nodes = res.nodes
    items = [
        ("case", res.case.id),
        ("description", res.case.description),
        ("seed", seed),
        ("nodes", f"{len(nodes)} ({nodes.M} interior, {nodes.N} boundary, mode {nodes.mode})"),
        ("times", ", ".join(f"{t:g}" for t in res.snapshot.times)),
        ("cond(Phi)", f"{system.cond_phi:.3e}"),
        ("cond(S)", f"{prop.cond_s:.3e}"),
        ("max Re(mu)", f"{prop.max_growth:.6e}"),
        ("build_ms", f"{res.build_ms:.1f}"),
        ("propagate_ms", f"{res.propagate_ms:.1f}"),
    ]
    items += [(f"param.{k}", v) for k, v in sorted(vars(res.params).items())]
    if res.report:
        row = res.report.rows[-1]
        items += [("mae", f"{row.mae:.6e}"), ("max_rel_err", f"{row.max_rel_err:.6e}")]
    return "".join(f"{k:<20}{v}\n" for k, v in items)


def cmd_run(args) -> int:
    try:
        cfg: RunConfig = load_config(args.config)
        case = bench.get_case(cfg.case)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    seed = cfg.seed if args.seed is None else args.seed
    out = Path(args.out or cfg.out_dir)
    try:
        res = bench.run_case(case, cfg.overrides, seed=seed, large=args.large or cfg.large)
    except (bench.CaseError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    out.mkdir(parents=True, exist_ok=True)
    write_fields(out / "fields.csv", res.snapshot)
    (out / "report.csv").write_text(report_csv(res.report, cfg.timing or args.timing),
                                    encoding="utf-8")
    (out / "summary.txt").write_text(summary_text(res, seed), encoding="utf-8")
    log.info("wrote %s", out)
    return 0


def _parse_spacings(text: str) -> list[float]:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def cmd_convergence(args) -> int:
    try:
        spacings = _parse_spacings(args.spacings)
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: bad spacing list ({exc})", file=sys.stderr)
        return 2
    try:
        report = bench.convergence_study(args.case, spacings, seed=args.seed)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except bench.CaseError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    text = report_csv(report, args.timing)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    for r in report.rows[1:]:
        flag = {True: "super-linear", False: "sub-linear", None: "rate undefined"}[r.superlinear]
        h = Fraction(r.spacing).limit_denominator(1000)
        print(f"# h={h}: rate {_fmt_rate(r.rate) or '-'} vs spacing ratio "
              f"{r.node_ratio:.3f} -> {flag}", file=sys.stderr)
    return 0


def cmd_list(args) -> int:
    for case in bench.CASES.values():
        print(f"{case.id:<22}{case.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frac-kansa",
                                description="Semi-discrete Kansa solver for space-time "
                                            "fractional advection-dispersion problems")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve one configured case")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.add_argument("--large", action="store_true", help="use the largest node set of the case")
    r.add_argument("--timing", action="store_true",
                   help="record wall times in report.csv (makes it run-dependent)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("convergence", help="refinement table for a case")
    c.add_argument("--case", required=True)
    c.add_argument("--spacings", required=True, help="comma list, e.g. 1/10,1/20,1/25")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.add_argument("--timing", action="store_true")
    c.set_defaults(func=cmd_convergence)

    ls = sub.add_parser("list-cases", help="print the benchmark catalogue")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    code = args.func(args)
    log.info("done in %.2f s", time.perf_counter() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
