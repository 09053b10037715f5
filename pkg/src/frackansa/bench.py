"""Benchmark problems, error metrics and convergence tables."""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import Disk, Domain, NodeSet, Rectangle, generate_nodes
from .mlf import gamma, mittag_leffler
from .operator import MixingMeasure
from .solver import (
    AxisOperator,
    BoundarySpec,
    FieldSnapshot,
    KansaSolver,
    MeasureOperator,
    ProblemSpec,
    SolverError,
)

REL_ERR_FLOOR = 1.0e-12
# errors at rounding level carry no rate information
EXACT_MAE = 1.0e-13


class CaseError(RuntimeError):
    """Solver failure annotated with the case that produced it."""


@dataclass(frozen=True)
class CaseParams:
    """Every tunable of a benchmark run.

    ``beta_x`` doubles as the single order of one-dimensional and measure
    problems. ``diffusion`` scales the measure operator (application cases);
    ``velocity`` is the constant x-velocity of the continuous application.
    """

    alpha: float
    beta_x: float = 2.0
    beta_y: float = 2.0
    velocity: float = 0.0
    diffusion: float = 1.0
    node_mode: str = "regular"
    spacing: float | None = None
    node_count: int | None = None
    ring_dr: float | None = None
    clearance: float = 0.0
    jiggle: float = 0.25
    shape_c: float = 0.1
    quad_k: int = 20
    quad_l: int = 32
    omega: float = 1.0
    times: tuple[float, ...] = (10.0,)
    directional: bool = False

    def replace(self, **kw) -> "CaseParams":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class BenchmarkCase:
    id: str
    description: str
    domain: Domain
    defaults: CaseParams
    build: Callable[[CaseParams], ProblemSpec]
    exact: Callable[[CaseParams, np.ndarray, np.ndarray, float], np.ndarray] | None = None
    large: dict = field(default_factory=dict)

    def problem(self, params: CaseParams) -> ProblemSpec:
        return self.build(params)

    def nodes(self, params: CaseParams, seed: int = 0) -> NodeSet:
        return generate_nodes(self.domain, params.node_mode, spacing=params.spacing,
                              count=params.node_count, ring_dr=params.ring_dr,
                              jiggle=params.jiggle, clearance=params.clearance, seed=seed)


# problem definitions

def _ml_decay(alpha: float, t: float) -> float:
    return mittag_leffler(alpha, -(t**alpha)).real if t > 0 else 1.0


def _example1(p: CaseParams) -> ProblemSpec:
    beta = p.beta_x
    k = lambda x, y: -gamma(1.5 - beta) * (x + 1.0) ** beta / (2.0 * gamma(1.5))
    u0 = lambda x, y: np.sqrt(x + 1.0)
    return ProblemSpec(p.alpha, EXAMPLE1_DOMAIN, AxisOperator(beta_x=beta, kx=k), u0=u0,
                       boundary=BoundarySpec("dirichlet", g=u0, omega=p.omega),
                       vx=lambda x, y: x + 1.0)


def _example1_exact(p, x, y, t):
    return np.sqrt(x + 1.0) * _ml_decay(p.alpha, t)


def _example2(domain: Domain):
    def build(p: CaseParams) -> ProblemSpec:
        bx, by = p.beta_x, p.beta_y
        kx = lambda x, y: -2.0 * gamma(1.5 - bx) * (x + 1.0) ** bx / (3.0 * gamma(1.5))
        ky = lambda x, y: -gamma(1.5 - by) * (y + 1.0) ** by / (3.0 * gamma(1.5))
        u0 = lambda x, y: np.sqrt((x + 1.0) * (y + 1.0))
        space = AxisOperator(bx, by, kx, ky, directional=p.directional)
        return ProblemSpec(p.alpha, domain, space, u0=u0,
                           boundary=BoundarySpec("dirichlet", g=u0, omega=p.omega))
    return build


def _example2_exact(p, x, y, t):
    return np.sqrt((x + 1.0) * (y + 1.0)) * _ml_decay(p.alpha, t)


def plume_bump(x, y):
    """Compactly supported bump of radius 0.2 and height 1000 centred at (1, 1)."""
    r2 = ((x - 1.0) ** 2 + (y - 1.0) ** 2) / 0.04
    out = np.zeros(np.broadcast(x, y).shape)
    inside = r2 < 1.0
    out[inside] = 1000.0 * 2.0 ** (1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def _app_continuous(p: CaseParams) -> ProblemSpec:
    measure = MixingMeasure.continuous(1.0, p.beta_x)
    return ProblemSpec(p.alpha, APP_DISK, MeasureOperator(measure, k=p.diffusion),
                       u0=plume_bump, boundary=BoundarySpec("dirichlet", 0.0, p.omega),
                       vx=p.velocity)


def point_source(x, y):
    """``10 / (r + 0.1)`` within radius 3 of (12, 20), zero outside."""
    r = np.hypot(x - 12.0, y - 20.0)
    return np.where(r < 3.0, 10.0 / (r + 0.1), 0.0)


def _app_discrete(p: CaseParams) -> ProblemSpec:
    measure = MixingMeasure.discrete([0.25 * math.pi, 1.75 * math.pi],
                                     [p.diffusion, p.diffusion], p.beta_x)
    return ProblemSpec(p.alpha, APP_SQUARE, MeasureOperator(measure, k=1.0),
                       u0=point_source, boundary=BoundarySpec("dirichlet", 0.0, p.omega))


EXAMPLE1_DOMAIN = Rectangle(0.0, 1.0, -0.5, 0.5)
UNIT_SQUARE = Rectangle(0.0, 1.0, 0.0, 1.0)
UNIT_DISK = Disk(1.0, 1.0, 1.0)
APP_DISK = Disk(1.0, 1.0, 1.0)
APP_SQUARE = Rectangle(0.0, 40.0, 0.0, 40.0)

CASES: dict[str, BenchmarkCase] = {
    c.id: c for c in (
        BenchmarkCase(
            "example1_1d",
            "1-D advection and fractional dispersion, variable coefficients, analytic solution",
            EXAMPLE1_DOMAIN,
            CaseParams(alpha=0.6, beta_x=1.6, node_mode="line", spacing=0.1, shape_c=0.1),
            _example1, _example1_exact,
        ),
        BenchmarkCase(
            "example2_rect",
            "2-D axis fractional diffusion on the unit square, analytic solution",
            UNIT_SQUARE,
            CaseParams(alpha=0.7, beta_x=1.6, beta_y=1.8, spacing=1 / 15, shape_c=0.01),
            _example2(UNIT_SQUARE), _example2_exact,
        ),
        BenchmarkCase(
            "example2_disk",
            "2-D axis fractional diffusion on a disk, ring or random nodes, analytic solution",
            UNIT_DISK,
            CaseParams(alpha=0.7, beta_x=1.6, beta_y=1.8, node_mode="disk_rings",
                       node_count=200, ring_dr=0.1, clearance=0.1, shape_c=0.15),
            _example2(UNIT_DISK), _example2_exact,
        ),
        BenchmarkCase(
            "app_continuous",
            "plume in a disk: drift plus isotropic (continuous measure) fractional dispersion",
            APP_DISK,
            CaseParams(alpha=0.9, beta_x=1.1, velocity=0.012, diffusion=0.03 / (2 * math.pi),
                       node_mode="disk_rings", node_count=800, ring_dr=0.1, shape_c=0.2,
                       omega=0.0, times=(0.0, 5.0, 10.0, 20.0)),
            _app_continuous,
        ),
        BenchmarkCase(
            "app_discrete",
            "plume in a square: fractional dispersion along two directions (discrete measure)",
            APP_SQUARE,
            CaseParams(alpha=0.5, beta_x=1.55, diffusion=0.1, spacing=0.8, shape_c=0.3,
                       omega=0.0, times=(0.0, 10.0)),
            _app_discrete, large={"spacing": 0.4},
        ),
        BenchmarkCase(
            "vector_vs_classical",
            "unit-square problem through the directional (vector) kernel at 0 and pi/2",
            UNIT_SQUARE,
            CaseParams(alpha=0.7, beta_x=1.6, beta_y=1.8, spacing=1 / 15, shape_c=0.01,
                       directional=True),
            _example2(UNIT_SQUARE), _example2_exact,
        ),
    )
}


def get_case(case_id: str) -> BenchmarkCase:
    try:
        return CASES[case_id]
    except KeyError:
        raise KeyError(f"unknown case {case_id!r}; known cases: {', '.join(CASES)}") from None


# error reporting

@dataclass
class ErrorRow:
    spacing: float
    n_nodes: int
    mae: float
    max_rel_err: float
    rate: float | None = None
    node_ratio: float | None = None
    wall_ms: float = 0.0
    time: float = 0.0

    @property
    def superlinear(self) -> bool | None:
        if self.rate is None or self.node_ratio is None or not math.isfinite(self.rate):
            return None
        return self.rate > self.node_ratio


@dataclass
class ErrorReport:
    case_id: str
    rows: list[ErrorRow] = field(default_factory=list)

    def add(self, row: ErrorRow) -> None:
        """Append a row, filling in its rate against the previous one."""
        if self.rows:
            prev = self.rows[-1]
            row.node_ratio = prev.spacing / row.spacing if row.spacing else None
            exact = min(prev.mae, row.mae) <= EXACT_MAE
            row.rate = math.nan if exact else prev.mae / row.mae
        self.rows.append(row)

    @property
    def maes(self) -> np.ndarray:
        return np.array([r.mae for r in self.rows])

    @property
    def rel_errors(self) -> np.ndarray:
        return np.array([r.max_rel_err for r in self.rows])

    def superlinear_steps(self) -> int:
        return sum(1 for r in self.rows if r.superlinear)


def error_metrics(u_num: np.ndarray, u_exact: np.ndarray) -> tuple[float, float]:
    """Maximum absolute error and maximum relative error.

    Points where ``|u_exact|`` is below ``REL_ERR_FLOOR`` are left out of the
    relative error.
    """
    err = np.abs(u_num - u_exact)
    mask = np.abs(u_exact) >= REL_ERR_FLOOR
    rel = float(np.max(err[mask] / np.abs(u_exact[mask]))) if np.any(mask) else math.nan
    return float(err.max()), rel


def equivalent_spacing(domain: Domain, nodes: NodeSet, params: CaseParams) -> float:
    if params.spacing is not None and params.node_mode in ("regular", "jiggled", "line"):
        return float(params.spacing)
    return math.sqrt(domain.area / len(nodes))


# runs

@dataclass
class CaseResult:
    case: BenchmarkCase
    params: CaseParams
    nodes: NodeSet
    solver: KansaSolver
    snapshot: FieldSnapshot
    report: ErrorReport | None
    build_ms: float
    propagate_ms: float


def resolve_params(case: BenchmarkCase, overrides: dict | None = None,
                   large: bool = False) -> CaseParams:
    params = case.defaults
    if large and case.large:
        params = params.replace(**case.large)
    if overrides:
        unknown = set(overrides) - {f.name for f in dataclasses.fields(CaseParams)}
        if unknown:
            raise ValueError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        params = params.replace(**overrides)
    return params


def run_case(case: BenchmarkCase | str, overrides: dict | None = None, seed: int = 0,
             large: bool = False) -> CaseResult:
    """Solve a benchmark case at its output times.

    The field snapshot holds every node (interior first) at every time. When
    the case has an analytic solution the report carries one row with the
    errors over interior nodes at the last time.
    """
    case = get_case(case) if isinstance(case, str) else case
    params = resolve_params(case, overrides, large)
    t0 = time.perf_counter()
    try:
        nodes = case.nodes(params, seed)
        solver = KansaSolver(case.problem(params), nodes, params.shape_c,
                             K=params.quad_k, L=params.quad_l)
        t1 = time.perf_counter()
        times = np.asarray(params.times, dtype=float)
        values = np.atleast_2d(solver.nodal_values(times))
    except (SolverError, np.linalg.LinAlgError) as exc:
        raise CaseError(f"{case.id}: {exc}") from exc
    t2 = time.perf_counter()
    snapshot = FieldSnapshot(nodes.points, times, values)

    report = None
    if case.exact is not None:
        report = ErrorReport(case.id)
        interior = nodes.interior
        tl = float(times[-1])
        exact = case.exact(params, interior[:, 0], interior[:, 1], tl)
        mae, rel = error_metrics(values[-1, : nodes.M], exact)
        report.add(ErrorRow(equivalent_spacing(case.domain, nodes, params), len(nodes), mae, rel,
                            wall_ms=1e3 * (t2 - t0), time=tl))
    return CaseResult(case, params, nodes, solver, snapshot, report,
                      1e3 * (t1 - t0), 1e3 * (t2 - t1))


def _spacing_overrides(case: BenchmarkCase, spacing: float) -> dict:
    if case.defaults.node_mode in ("regular", "jiggled", "line"):
        return {"spacing": spacing}
    return {"node_count": int(round(case.domain.area / spacing**2))}


def convergence_study(case: BenchmarkCase | str, spacings: Sequence[float],
                      overrides: dict | None = None, seed: int = 0) -> ErrorReport:
    """Refinement table over strictly decreasing spacings.

    Count-based node modes turn each spacing into a node count ``area / h**2``.
    A row's ``rate`` is the previous MAE over its own; it is NaN (undefined)
    when either MAE is at rounding level (``EXACT_MAE``).
    """
    case = get_case(case) if isinstance(case, str) else case
    if case.exact is None:
        raise ValueError(f"{case.id} has no analytic solution to measure errors against")
    spacings = [float(h) for h in spacings]
    if len(spacings) < 2:
        raise ValueError("a convergence study needs at least two spacings")
    if any(h <= 0 for h in spacings) or any(b >= a for a, b in zip(spacings, spacings[1:])):
        raise ValueError("spacings must be positive and strictly decreasing")
    report = ErrorReport(case.id)
    for h in spacings:
        ov = dict(overrides or {})
        ov.update(_spacing_overrides(case, h))
        res = run_case(case, ov, seed)
        row = res.report.rows[0]
        row.spacing = h
        report.add(row)
    return report


def long_time_study(times: Sequence[float] = (1e2, 1e3, 1e4, 1e5), spacing: float = 1 / 20,
                    shape_c: float = 0.1, probe: float = 0.5, repeats: int = 5) -> ErrorReport:
    """Relative error at ``x = probe`` of the one-dimensional example at long times.

    The system is built once; each row times one propagation plus evaluation
    (best of ``repeats``), which costs the same at every ``t``.
    """
    case = CASES["example1_1d"]
    params = case.defaults.replace(spacing=spacing, shape_c=shape_c)
    nodes = case.nodes(params)
    solver = KansaSolver(case.problem(params), nodes, shape_c, K=params.quad_k)
    pt = np.array([[probe, 0.5 * (EXAMPLE1_DOMAIN.ymin + EXAMPLE1_DOMAIN.ymax)]])
    report = ErrorReport(case.id)
    for t in times:
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            u = solver.snapshot(pt, [t]).values[0, 0]
            best = min(best, time.perf_counter() - t0)
        exact = float(case.exact(params, pt[:, 0], pt[:, 1], t)[0])
        err = abs(u - exact)
        report.add(ErrorRow(spacing, len(nodes), err, err / abs(exact), wall_ms=1e3 * best,
                            time=float(t)))
    return report


def vector_vs_classical(spacings: Sequence[float] = (1 / 10, 1 / 15, 1 / 20, 1 / 25),
                        **overrides) -> tuple[ErrorReport, ErrorReport]:
    """Same problem through the directional kernel (C1) and the axis kernel (C2)."""
    case = CASES["vector_vs_classical"]
    c1 = convergence_study(case, spacings, {**overrides, "directional": True})
    c2 = convergence_study(case, spacings, {**overrides, "directional": False})
    c1.case_id, c2.case_id = "C1", "C2"
    return c1, c2


# plume diagnostics for the application cases

def center_of_mass(points: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Discrete ``sum(x u) / sum(u)`` per coordinate."""
    total = values.sum()
    return (points * values[:, None]).sum(axis=0) / total


def second_moment(points: np.ndarray, values: np.ndarray, theta: float) -> float:
    """Spread of the field along the axis at angle ``theta`` about its centre of mass."""
    c = center_of_mass(points, values)
    axis = np.array([math.cos(theta), math.sin(theta)])
    proj = (points - c) @ axis
    return float((values * proj**2).sum() / values.sum())
