import math

import numpy as np
import pytest

from frackansa.geometry import NodeSet, Rectangle, generate_nodes
from frackansa.mlf import gamma, mittag_leffler
from frackansa.operator import RbfBasis, mq_dx, mq_matrix
from frackansa.solver import (
    AxisOperator,
    BoundarySpec,
    CollocationSystem,
    DefectiveSpectrumError,
    IllConditionedError,
    KansaSolver,
    ProblemSpec,
    SolverError,
    assemble,
    condition_estimate,
    evaluate,
    index_reduce,
    propagate,
)

SQUARE = Rectangle(0.0, 1.0, 0.0, 1.0)
STRIP = Rectangle(0.0, 1.0, -0.5, 0.5)


def toy_system(b_int):
    """Collocation system with identity interpolation and no boundary rows."""
    n = len(b_int)
    nodes = NodeSet(np.column_stack([np.linspace(0.1, 0.9, n), np.zeros(n)]),
                    np.zeros((0, 2)), "toy")
    basis = RbfBasis(nodes.points, 1.0)
    return CollocationSystem(nodes, basis, np.eye(n), np.asarray(b_int, float),
                             np.zeros((0, n)), np.zeros(n), 1.0)


def expm_series(a, terms=80):
    out = np.eye(len(a))
    term = np.eye(len(a))
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def example2_problem(alpha=0.7, omega=1.0):
    kx = lambda x, y: -2.0 * gamma(1.5 - 1.6) * (x + 1.0) ** 1.6 / (3.0 * gamma(1.5))
    ky = lambda x, y: -gamma(1.5 - 1.8) * (y + 1.0) ** 1.8 / (3.0 * gamma(1.5))
    u0 = lambda x, y: np.sqrt((x + 1.0) * (y + 1.0))
    return ProblemSpec(alpha, SQUARE, AxisOperator(1.6, 1.8, kx, ky), u0=u0,
                       boundary=BoundarySpec("dirichlet", g=u0, omega=omega))


def example1_problem():
    beta = 1.6
    k = lambda x, y: -gamma(1.5 - beta) * (x + 1.0) ** beta / (2.0 * gamma(1.5))
    u0 = lambda x, y: np.sqrt(x + 1.0)
    return ProblemSpec(0.6, STRIP, AxisOperator(beta_x=beta, kx=k), u0=u0,
                       boundary=BoundarySpec("dirichlet", g=u0, omega=1.0),
                       vx=lambda x, y: x + 1.0)


def heat_problem(alpha=1.0):
    u0 = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
    return ProblemSpec(alpha, SQUARE, AxisOperator(2.0, 2.0, 1.0, 1.0), u0=u0,
                       boundary=BoundarySpec("dirichlet", 0.0))


@pytest.fixture(scope="module")
def ex2_solver():
    ns = generate_nodes(SQUARE, "regular", spacing=1 / 10)
    return KansaSolver(example2_problem(), ns, 0.1)


@pytest.fixture(scope="module")
def heat_solver():
    ns = generate_nodes(SQUARE, "regular", spacing=1 / 12)
    return KansaSolver(heat_problem(), ns, 0.2)


class TestToySystems:
    def test_diagonal_spectrum(self):
        prop = index_reduce(toy_system(np.diag([1.0, 2.0])), BoundarySpec())
        assert sorted(prop.eigenvalues.real) == pytest.approx([-2.0, -1.0])
        assert np.all(prop.eigenvalues.imag == 0)

    def test_scalar_relaxation(self):
        prop = index_reduce(toy_system([[1.0]]), BoundarySpec())
        for alpha in (0.4, 0.8, 1.0):
            for t in (0.3, 2.0, 15.0):
                lam = propagate(prop, alpha, np.array([1.0]), t)
                assert lam[0] == pytest.approx(mittag_leffler(alpha, -(t ** alpha)).real, abs=1e-13)

    def test_matrix_exponential(self):
        m = np.array([[1.0, 0.4], [-0.3, 2.0]])
        prop = index_reduce(toy_system(m), BoundarySpec())
        v0 = np.array([0.7, -1.2])
        for t in (0.1, 0.5, 1.5):
            ref = expm_series(-m * t) @ v0
            np.testing.assert_allclose(propagate(prop, 1.0, v0, t), ref, atol=1e-10)

    def test_rotation_spectrum_is_real_after_pairing(self):
        # complex conjugate eigenvalues must still give a real trajectory
        m = np.array([[0.5, 2.0], [-2.0, 0.5]])
        prop = index_reduce(toy_system(m), BoundarySpec())
        assert np.any(prop.eigenvalues.imag != 0)
        v0 = np.array([1.0, 0.0])
        lam = propagate(prop, 0.8, v0, [0.0, 1.0, 3.0])
        assert lam.shape == (3, 2) and np.all(np.isfinite(lam))

    def test_defective_spectrum(self):
        with pytest.raises(DefectiveSpectrumError):
            index_reduce(toy_system([[1.0, 1.0], [0.0, 1.0]]), BoundarySpec())

    def test_growing_mode_overflow(self):
        prop = index_reduce(toy_system([[-50.0]]), BoundarySpec())
        with pytest.raises(SolverError, match="growing"):
            propagate(prop, 1.0, np.array([1.0]), 100.0)

    def test_singular_with_source(self):
        sys = toy_system(np.diag([0.0, 1.0]))
        sys.forcing[:] = 1.0
        with pytest.raises(SolverError, match="singular"):
            index_reduce(sys, BoundarySpec())

    def test_source_shift(self):
        sys = toy_system(np.diag([2.0, 4.0]))
        sys.forcing[:] = [1.0, 2.0]
        prop = index_reduce(sys, BoundarySpec())
        # D^a lam = -M lam + F relaxes to M^-1 F
        lam = propagate(prop, 1.0, np.zeros(2), 60.0)
        np.testing.assert_allclose(lam, [0.5, 0.5], atol=1e-12)

    def test_negative_time(self):
        prop = index_reduce(toy_system([[1.0]]), BoundarySpec())
        with pytest.raises(ValueError):
            propagate(prop, 0.5, np.array([1.0]), -1.0)


def test_condition_estimate():
    a = np.diag([1.0, 1e-6])
    assert condition_estimate(a) == pytest.approx(1e6, rel=1e-12)
    assert condition_estimate(np.zeros((2, 2))) == math.inf
    rng = np.random.default_rng(0)
    b = rng.standard_normal((30, 30))
    exact = np.linalg.cond(b, 1)
    assert exact / 10 <= condition_estimate(b) <= exact * 1.0000001


class TestAssembly:
    def test_zero_operator_rows(self):
        nodes = NodeSet(np.array([[0.5, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]]), "line")
        prob = ProblemSpec(0.5, STRIP, AxisOperator(kx=None, ky=None), u0=0.0)
        sys = assemble(prob, nodes, RbfBasis(nodes.points, 0.3))
        assert np.all(sys.b_interior == 0.0)

    def test_pure_advection_rows(self):
        ns = generate_nodes(SQUARE, "regular", spacing=0.25)
        prob = ProblemSpec(0.5, SQUARE, AxisOperator(kx=None, ky=None), u0=0.0, vx=1.0)
        sys = assemble(prob, ns, RbfBasis(ns.points, 0.3))
        # b_interior holds the negated spatial operator, which is -dPhi/dx here
        np.testing.assert_array_equal(-sys.b_interior, -mq_dx(ns.interior, ns.points, 0.3))

    def test_interpolation_rows(self, ex2_solver):
        sys = ex2_solver.system
        pts = ex2_solver.nodes.points
        np.testing.assert_array_equal(sys.phi_full, mq_matrix(pts, pts, 0.1))
        np.testing.assert_array_equal(sys.b_boundary, sys.phi_full[ex2_solver.nodes.M:])

    def test_neumann_rows(self):
        ns = generate_nodes(SQUARE, "regular", spacing=0.25)
        prob = ProblemSpec(0.5, SQUARE, AxisOperator(2.0, 2.0, 1.0, 1.0), u0=0.0,
                           boundary=BoundarySpec("mixed", 0.0,
                                                 neumann_mask=lambda x, y: x == 1.0))
        sys = assemble(prob, ns, RbfBasis(ns.points, 0.3))
        right = ns.boundary[:, 0] == 1.0
        np.testing.assert_array_equal(sys.b_boundary[right], mq_dx(ns.boundary[right], ns.points, 0.3))
        np.testing.assert_array_equal(sys.b_boundary[~right], mq_matrix(ns.boundary[~right], ns.points, 0.3))

    def test_ill_conditioned(self):
        ns = generate_nodes(SQUARE, "regular", spacing=1 / 20)
        with pytest.raises(IllConditionedError):
            assemble(heat_problem(), ns, RbfBasis(ns.points, 2.0))

    def test_center_mismatch(self):
        ns = generate_nodes(SQUARE, "regular", spacing=0.25)
        with pytest.raises(ValueError):
            assemble(heat_problem(), ns, RbfBasis(ns.points[::-1], 0.3))

    def test_initial_data_mismatch(self):
        ns = generate_nodes(SQUARE, "regular", spacing=0.25)
        prob = ProblemSpec(0.5, SQUARE, AxisOperator(2.0, 2.0, 1.0, 1.0), u0=1.0,
                           boundary=BoundarySpec("dirichlet", 0.0))
        with pytest.raises(ValueError, match="boundary data"):
            KansaSolver(prob, ns, 0.3)

    @pytest.mark.parametrize("alpha", [0.0, 1.2])
    def test_time_order_range(self, alpha):
        with pytest.raises(ValueError):
            ProblemSpec(alpha, SQUARE, AxisOperator(), u0=0.0)

    def test_bad_boundary_kind(self):
        with pytest.raises(ValueError):
            BoundarySpec("robin")
        with pytest.raises(ValueError):
            BoundarySpec(omega=-1.0)


class TestPropagation:
    def test_reproduces_initial_data(self, ex2_solver):
        pts = ex2_solver.nodes.points
        u0 = np.sqrt((pts[:, 0] + 1) * (pts[:, 1] + 1))
        lam = ex2_solver.coefficients(0.0)
        assert np.abs(evaluate(ex2_solver.basis, lam, pts) - u0).max() <= 1e-10

    def test_evaluate_definition(self, ex2_solver):
        lam = ex2_solver.coefficients(1.0)
        pts = ex2_solver.nodes.points
        np.testing.assert_allclose(evaluate(ex2_solver.basis, lam, pts),
                                   ex2_solver.system.phi_full @ lam, rtol=0, atol=1e-14)
        e = np.zeros(len(pts))
        e[3] = 1.0
        q = np.array([[0.37, 0.61]])
        assert evaluate(ex2_solver.basis, e, q)[0] == pytest.approx(
            math.sqrt(np.sum((q[0] - pts[3]) ** 2) + 0.01))

    def test_boundary_fidelity(self, ex2_solver):
        nodes = ex2_solver.nodes
        g = np.sqrt((nodes.boundary[:, 0] + 1) * (nodes.boundary[:, 1] + 1))
        for t in (0.5, 1.0, 10.0, 50.0):
            u = ex2_solver.nodal_values(t)[nodes.M:]
            ref = g * mittag_leffler(0.7, -(t ** 0.7)).real
            assert np.abs(u - ref).max() <= 1e-6

    def test_constraint_propagation(self, ex2_solver):
        prop, sys = ex2_solver.propagator, ex2_solver.system
        lam = ex2_solver.coefficients(0.0)
        bb = sys.b_boundary
        lhs = bb @ (-prop.m_matrix @ lam)
        rhs = -prop.omega * (bb @ lam)
        assert np.abs(lhs - rhs).max() <= 1e-8 * np.abs(rhs).max()

    def test_propagator_invariants(self, ex2_solver):
        prop = ex2_solver.propagator
        assert prop.cond_s <= 1e12
        assert prop.recon_err <= 1e-8
        assert prop.max_growth < 0

    def test_linearity(self, heat_solver):
        pts = heat_solver.nodes.points
        x, y = pts[:, 0], pts[:, 1]
        u = np.sin(np.pi * x) * np.sin(np.pi * y)
        v = x * (1 - x) * y * (1 - y)
        prop = heat_solver.propagator
        for alpha in (0.5, 1.0):
            lhs = propagate(prop, alpha, 2.0 * u - 3.0 * v, 0.05)
            rhs = 2.0 * propagate(prop, alpha, u, 0.05) - 3.0 * propagate(prop, alpha, v, 0.05)
            assert np.abs(lhs - rhs).max() <= 1e-10 * max(1.0, np.abs(lhs).max())

    def test_semigroup_at_alpha_one(self):
        ns = generate_nodes(SQUARE, "regular", spacing=1 / 10)
        s = KansaSolver(example2_problem(alpha=1.0), ns, 0.1)
        t1, t2 = 0.3, 0.5
        u1 = s.nodal_values(t1)
        direct = s.nodal_values(t1 + t2)
        lam = propagate(s.propagator, 1.0, u1, t2)
        twice = s.system.phi_full @ lam
        assert np.abs(direct - twice).max() <= 1e-8

    def test_time_vector_shape(self, ex2_solver):
        lam = ex2_solver.coefficients([0.0, 1.0, 2.0])
        assert lam.shape == (3, len(ex2_solver.nodes))
        np.testing.assert_array_equal(lam[1], ex2_solver.coefficients(1.0))

    def test_snapshot(self, ex2_solver):
        q = np.array([[0.5, 0.5], [0.25, 0.75]])
        snap = ex2_solver.snapshot(q, [1.0, 2.0])
        assert snap.values.shape == (2, 2)
        exact = np.sqrt(1.5 * 1.5) * mittag_leffler(0.7, -1.0).real
        assert snap.values[0, 0] == pytest.approx(exact, abs=5e-3)


def test_classical_limit(heat_solver):
    centre = np.array([[0.5, 0.5]])
    snap = heat_solver.snapshot(centre, [0.01, 0.02])
    rate = -math.log(snap.values[1, 0] / snap.values[0, 0]) / 0.01
    assert rate == pytest.approx(2 * math.pi ** 2, rel=0.05)


@pytest.fixture(scope="module")
def ex1_solver():
    ns = generate_nodes(STRIP, "line", spacing=1 / 20)
    return KansaSolver(example1_problem(), ns, 0.1)


class TestExampleOne:
    def test_spectrum_decays(self, ex1_solver):
        assert np.all(ex1_solver.propagator.eigenvalues.real < 0)

    def test_long_time_boundedness(self, ex1_solver):
        norms = [np.linalg.norm(ex1_solver.coefficients(t)) for t in (10.0, 100.0, 1000.0)]
        assert norms[0] >= norms[1] >= norms[2]

    def test_midpoint_value(self, ex1_solver):
        u = ex1_solver.snapshot(np.array([[0.5, 0.0]]), [10.0]).values[0, 0]
        ref = math.sqrt(1.5) * mittag_leffler(0.6, -(10.0 ** 0.6)).real
        # the discrete limit differs from this reference by about 1e-3 (see README)
        assert u == pytest.approx(ref, abs=1e-2)


def test_manufactured_solution_converges():
    # u = (x+1)^2 E_a(-t^a) solves the equation exactly with this velocity
    alpha, beta = 0.6, 1.6
    u = lambda x, y: (x + 1.0) ** 2
    v = lambda x, y: ((x + 1) ** 2 + 2 * x ** (2 - beta) / gamma(3 - beta)) / (2 * (x + 1))
    prob = ProblemSpec(alpha, STRIP, AxisOperator(beta_x=beta, kx=1.0), u0=u,
                       boundary=BoundarySpec("dirichlet", g=u, omega=1.0), vx=v)
    decay = mittag_leffler(alpha, -(10.0 ** alpha)).real
    errs = []
    for h in (1 / 10, 1 / 25, 1 / 50):
        ns = generate_nodes(STRIP, "line", spacing=h)
        un = KansaSolver(prob, ns, 0.1).nodal_values(10.0)
        errs.append(np.abs(un - u(ns.points[:, 0], 0) * decay)[: ns.M].max())
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3
