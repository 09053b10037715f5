"""Semi-discrete Kansa collocation with an exact Mittag-Leffler time propagator.

The collocated system is

    Phi_d  D^a lam = L lam + F          (interior rows)
    B_b    lam     = g * E_a(-w t^a)     (boundary rows)

Taking the Caputo derivative of the boundary constraint gives
``B_b D^a lam = -w B_b lam``, so with the mass matrix ``[Phi_d; B_b]``
the whole system becomes ``D^a lam = -M lam + F~`` and is solved exactly
through the eigendecomposition of ``-M``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .geometry import Domain, NodeSet
from .mlf import MittagLefflerOverflow, mittag_leffler_array
from .operator import (
    DEFAULT_K,
    MixingMeasure,
    RbfBasis,
    frac_axis_matrix,
    frac_mixed_matrix,
    mq_dx,
    mq_dy,
    mq_matrix,
)
from .quadrature import angular_rule

logger = logging.getLogger(__name__)

FieldLike = Callable[[np.ndarray, np.ndarray], np.ndarray] | float | None

MAX_INTERP_COND = 1.0e14
MAX_MODAL_COND = 1.0e12
IMAG_RESIDUE_TOL = 1.0e-8
RECON_TOL = 1.0e-8


class SolverError(RuntimeError):
    pass


class IllConditionedError(SolverError):
    pass


class DefectiveSpectrumError(SolverError):
    pass


def condition_estimate(a: np.ndarray) -> float:
    """1-norm condition number estimate from an LU factorisation (LAPACK ``gecon``).

    Far cheaper than the SVD for the dense matrices met here; returns ``inf``
    for exactly singular input.
    """
    if a.size == 0:
        return 1.0
    with warnings.catch_warnings():
        # an exactly singular factor is reported below as inf
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, _ = sla.lu_factor(a, check_finite=False)
    (gecon,) = sla.get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, np.linalg.norm(a, 1))
    if info != 0 or rcond == 0.0:
        return math.inf
    return 1.0 / rcond


def field_values(f: FieldLike, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if f is None:
        return np.zeros_like(x, dtype=float)
    if callable(f):
        return np.broadcast_to(np.asarray(f(x, y), dtype=float), x.shape).copy()
    return np.full_like(x, float(f), dtype=float)


@dataclass(frozen=True)
class AxisOperator:
    """``K_x d^bx/dx^bx + K_y d^by/dy^by``; a ``None`` coefficient drops the term."""

    beta_x: float = 2.0
    beta_y: float = 2.0
    kx: FieldLike = None
    ky: FieldLike = None
    directional: bool = False


@dataclass(frozen=True)
class MeasureOperator:
    """``k(x, y)`` times the mixing-measure combination of directional derivatives."""

    measure: MixingMeasure
    k: FieldLike = 1.0


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary data ``g(x, y) * E_alpha(-omega t**alpha)``.

    ``kind`` is ``dirichlet`` or ``neumann_x``; ``neumann_mask`` selects the
    Neumann nodes when conditions are mixed.
    """

    kind: str = "dirichlet"
    g: FieldLike = 0.0
    omega: float = 0.0
    neumann_mask: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann_x", "mixed"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.omega < 0:
            raise ValueError("boundary decay rate must be nonnegative")

    def neumann_nodes(self, pts: np.ndarray) -> np.ndarray:
        if self.kind == "dirichlet":
            return np.zeros(len(pts), dtype=bool)
        if self.kind == "neumann_x":
            return np.ones(len(pts), dtype=bool)
        return np.asarray(self.neumann_mask(pts[:, 0], pts[:, 1]), dtype=bool)


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    domain: Domain
    space: AxisOperator | MeasureOperator
    u0: FieldLike
    boundary: BoundarySpec = field(default_factory=BoundarySpec)
    vx: FieldLike = None
    vy: FieldLike = None
    source: FieldLike = None

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"time order must lie in (0, 1], got {self.alpha}")


@dataclass
class CollocationSystem:
    nodes: NodeSet
    basis: RbfBasis
    phi_full: np.ndarray
    b_interior: np.ndarray
    b_boundary: np.ndarray
    forcing: np.ndarray
    cond_phi: float

    @property
    def mass(self) -> np.ndarray:
        return np.vstack([self.phi_full[: self.nodes.M], self.b_boundary])


@dataclass
class Propagator:
    """Diagonalised reduced system ``D^a lam = -M lam + F~``.

    ``recon_err`` is ``max|S diag(mu) S^-1 + M| / max(max|M|, 1)``.
    """

    m_matrix: np.ndarray
    eigenvalues: np.ndarray
    modes: np.ndarray
    modes_inv: np.ndarray
    cond_s: float
    shift: np.ndarray
    omega: float
    phi_full: np.ndarray
    recon_err: float = 0.0

    @property
    def max_growth(self) -> float:
        """Largest real part among the eigenvalues of ``-M``."""
        return float(self.eigenvalues.real.max()) if len(self.eigenvalues) else -np.inf


def _space_rows(problem: ProblemSpec, pts, centers, c, K, L) -> np.ndarray:
    """Interior rows of the spatial operator (advection plus fractional diffusion)."""
    x, y = pts[:, 0], pts[:, 1]
    rows = np.zeros((len(pts), len(centers)))
    if problem.vx is not None:
        rows -= field_values(problem.vx, x, y)[:, None] * mq_dx(pts, centers, c)
    if problem.vy is not None:
        rows -= field_values(problem.vy, x, y)[:, None] * mq_dy(pts, centers, c)
    sp = problem.space
    dom = problem.domain
    if isinstance(sp, AxisOperator):
        for coef, beta, axis, theta in ((sp.kx, sp.beta_x, "x", 0.0),
                                        (sp.ky, sp.beta_y, "y", 0.5 * math.pi)):
            if coef is None:
                continue
            if sp.directional:
                m = MixingMeasure.discrete([theta], [1.0], [beta])
                d = frac_mixed_matrix(pts, centers, c, m, dom, K)
            else:
                d = frac_axis_matrix(pts, centers, c, beta, axis, dom, K)
            rows += field_values(coef, x, y)[:, None] * d
    else:
        ang = angular_rule(L) if sp.measure.form == "continuous" else None
        d = frac_mixed_matrix(pts, centers, c, sp.measure, dom, K, ang)
        rows += field_values(sp.k, x, y)[:, None] * d
    return rows


def assemble(problem: ProblemSpec, nodes: NodeSet, basis: RbfBasis,
             K: int = DEFAULT_K, L: int = 32) -> CollocationSystem:
    """Build interpolation, operator and boundary matrices.

    ``K`` is the per-panel quadrature size of the fractional integrals and
    ``L`` the angular rule size for continuous mixing measures.
    """
    pts = nodes.points
    if basis.centers.shape != pts.shape or not np.array_equal(basis.centers, pts):
        raise ValueError("basis centers must coincide with the node set")
    c = basis.shape_c
    phi = mq_matrix(pts, pts, c)
    cond = condition_estimate(phi)
    if not np.isfinite(cond) or cond > MAX_INTERP_COND:
        raise IllConditionedError(
            f"interpolation matrix condition {cond:.3e} exceeds {MAX_INTERP_COND:.0e}; "
            "reduce the shape parameter or fix clashing nodes"
        )
    interior, boundary = nodes.interior, nodes.boundary
    b_int = -_space_rows(problem, interior, pts, c, K, L)

    neu = problem.boundary.neumann_nodes(boundary)
    b_bnd = mq_matrix(boundary, pts, c)
    if np.any(neu):
        b_bnd[neu] = mq_dx(boundary[neu], pts, c)
    forcing = field_values(problem.source, interior[:, 0], interior[:, 1])
    logger.debug("assembled %d x %d system, cond(Phi)=%.3e", len(pts), len(pts), cond)
    return CollocationSystem(nodes, basis, phi, b_int, b_bnd, forcing, cond)


def boundary_data(problem: ProblemSpec, nodes: NodeSet) -> np.ndarray:
    b = nodes.boundary
    return field_values(problem.boundary.g, b[:, 0], b[:, 1])


def index_reduce(system: CollocationSystem, boundary: BoundarySpec,
                 g_values: np.ndarray | None = None) -> Propagator:
    """Turn the constrained system into ``D^a lam = -M lam + F~`` and diagonalise ``-M``.

    With homogeneous boundary data the decay rate of the constraint is
    arbitrary; ``omega = 0`` is then replaced by 1 so that the boundary modes
    do not pile up on a repeated zero eigenvalue.
    """
    omega = float(boundary.omega)
    if omega == 0.0 and g_values is not None and not np.any(g_values):
        omega = 1.0
    mass = system.mass
    rhs = np.vstack([system.b_interior, omega * system.b_boundary])
    m_mat = np.linalg.solve(mass, rhs)
    n_int = system.nodes.M
    f_full = np.concatenate([system.forcing, np.zeros(system.nodes.N)])
    f_tilde = np.linalg.solve(mass, f_full)

    eigs, s = np.linalg.eig(-m_mat)
    cond_s = condition_estimate(s)
    if not np.isfinite(cond_s) or cond_s > MAX_MODAL_COND:
        raise DefectiveSpectrumError(
            f"modal matrix condition {cond_s:.3e} exceeds {MAX_MODAL_COND:.0e}"
        )
    s_inv = np.linalg.inv(s)
    scale = max(np.abs(m_mat).max(), 1.0)
    recon_err = float(np.abs((s * eigs) @ s_inv + m_mat).max() / scale)
    if recon_err > RECON_TOL:
        # rounding in S^-1 grows like eps * cond(S), so this can trip well below
        # the cond(S) limit; the imaginary-residue check in propagate still guards
        logger.warning("eigendecomposition reproduces -M only to %.2e (cond S = %.2e)",
                       recon_err, cond_s)
    growth = float(eigs.real.max())
    if growth > 1.0e-8 * scale:
        logger.warning("reduced system has a growing mode, max Re(mu) = %.3e", growth)

    shift = np.zeros(len(f_full))
    if np.any(system.forcing[:n_int]):
        if np.min(np.abs(eigs)) < 1.0e-12 * scale:
            raise SolverError("source present but the reduced matrix M is singular")
        shift = np.linalg.solve(m_mat, f_tilde)
    return Propagator(m_mat, eigs, s, s_inv, cond_s, shift, omega,
                      system.phi_full, recon_err)


def propagate(prop: Propagator, alpha: float, u0_values: np.ndarray, t) -> np.ndarray:
    """Coefficient vectors at the requested time(s).

    ``u0_values`` is the initial field at all nodes, interior first. Returns
    shape ``(n,)`` for scalar ``t`` and ``(len(t), n)`` otherwise.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    lam0 = np.linalg.solve(prop.phi_full, np.asarray(u0_values, dtype=float))
    # a backward-stable solve leaves a far smaller imaginary residue than S^-1 @ v
    modal = np.linalg.solve(prop.modes, (lam0 - prop.shift).astype(complex))
    out = np.empty((len(times), len(lam0)))
    for k, tk in enumerate(times):
        if tk == 0.0:
            lam = lam0.astype(complex)
        else:
            try:
                decay = mittag_leffler_array(alpha, prop.eigenvalues * tk**alpha)
            except MittagLefflerOverflow:
                decay = np.full(len(modal), np.inf)
            with np.errstate(over="ignore", invalid="ignore"):
                lam = prop.modes @ (decay * modal) + prop.shift
            if not np.all(np.isfinite(lam)):
                raise SolverError(
                    f"solution overflowed at t={tk:g}; the reduced system has growing "
                    f"modes (max Re(mu) = {prop.max_growth:.3e})"
                )
        norm = np.linalg.norm(lam)
        resid = np.abs(lam.imag).max() if len(lam) else 0.0
        if resid > IMAG_RESIDUE_TOL * max(norm, 1e-300):
            raise SolverError(
                f"imaginary residue {resid:.3e} at t={tk:g} exceeds tolerance; "
                "modal decomposition is too ill-conditioned"
            )
        out[k] = lam.real
    return out[0] if np.ndim(t) == 0 else out


def evaluate(basis: RbfBasis, lam: np.ndarray, points) -> np.ndarray:
    """Field values ``sum_j lam_j phi(|p - c_j|)`` at the query points."""
    return mq_matrix(points, basis.centers, basis.shape_c) @ lam


@dataclass
class FieldSnapshot:
    points: np.ndarray
    times: np.ndarray
    values: np.ndarray  # (len(times), len(points))


class KansaSolver:
    """Assembled and diagonalised problem, ready to answer (point, time) queries."""

    def __init__(self, problem: ProblemSpec, nodes: NodeSet, shape_c: float,
                 K: int = DEFAULT_K, L: int = 32):
        self.problem = problem
        self.nodes = nodes
        self.basis = RbfBasis(nodes.points, float(shape_c))
        self.system = assemble(problem, nodes, self.basis, K=K, L=L)
        g = boundary_data(problem, nodes)
        self.propagator = index_reduce(self.system, problem.boundary, g)
        pts = nodes.points
        u0 = field_values(problem.u0, pts[:, 0], pts[:, 1])
        if problem.boundary.kind == "dirichlet":
            gap = np.abs(u0[nodes.M:] - g).max() if nodes.N else 0.0
            if gap > 1.0e-8 * max(1.0, np.abs(u0).max()):
                raise ValueError(f"initial field disagrees with boundary data by {gap:.3e}")
        self.u0 = u0

    def coefficients(self, t) -> np.ndarray:
        return propagate(self.propagator, self.problem.alpha, self.u0, t)

    def nodal_values(self, t) -> np.ndarray:
        lam = self.coefficients(t)
        return lam @ self.system.phi_full.T

    def snapshot(self, points, times) -> FieldSnapshot:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        times = np.atleast_1d(np.asarray(times, dtype=float))
        lam = np.atleast_2d(self.coefficients(times))
        phi = mq_matrix(points, self.basis.centers, self.basis.shape_c)
        return FieldSnapshot(points, times, lam @ phi.T)
