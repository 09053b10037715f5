import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import roots_jacobi

from frackansa.quadrature import angular_rule, gauss_jacobi, gauss_legendre


def legendre(n, x):
    p0, p1 = 1.0, x
    if n == 0:
        return p0
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    return p1


def legendre_roots_bisection(n):
    grid = np.linspace(-1.0, 1.0, 40 * n + 1)
    vals = [legendre(n, x) for x in grid]
    roots = []
    for lo, hi, flo, fhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi > 0 or fhi == 0.0:
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = legendre(n, mid)
            if fm == 0.0 or hi - lo < 1e-17:
                break
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return np.array(roots)


def jacobi_moment(m, a, b):
    # x = 2u - 1 turns the moment into a binomial sum of Beta functions;
    # the sum cancels heavily, hence the working precision
    with mpmath.workdps(50):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        total = mpmath.fsum(mpmath.binomial(m, k) * 2 ** k * (-1) ** (m - k)
                            * mpmath.beta(a + 1, b + k + 1) for k in range(m + 1))
        return float(2 ** (a + b + 1) * total)


class TestExamples:
    def test_one_point(self):
        r = gauss_jacobi(1, 0, 0)
        assert r.nodes.tolist() == [0.0]
        assert r.weights.tolist() == pytest.approx([2.0], abs=1e-15)

    def test_two_point(self):
        r = gauss_jacobi(2, 0, 0)
        assert r.nodes == pytest.approx([-0.5773502692, 0.5773502692], abs=1e-10)
        assert r.weights == pytest.approx([1.0, 1.0], abs=1e-14)

    def test_weight_sum_singular(self):
        r = gauss_jacobi(8, -0.6, 0)
        # 2**0.4 / 0.4 = 3.29876977693...
        assert r.weights.sum() == pytest.approx(2 ** 0.4 / 0.4, rel=1e-12)
        assert r.weights.sum() == pytest.approx(3.29876977, abs=1e-8)


@pytest.mark.parametrize("n", [1, 3, 8, 16, 20, 40])
@pytest.mark.parametrize("a", [0.0, -0.1, -0.6, -0.9, 0.5])
def test_rule_invariants(n, a):
    r = gauss_jacobi(n, a, 0.0)
    assert len(r.nodes) == n == len(r.weights)
    assert np.all(np.diff(r.nodes) > 0)
    assert np.all(np.abs(r.nodes) < 1.0)
    assert np.all(r.weights > 0)
    mass = 2.0 ** (a + 1.0) / (a + 1.0)
    assert r.weights.sum() == pytest.approx(mass, rel=1e-12)


@pytest.mark.parametrize("n", [2, 5, 10, 16])
@pytest.mark.parametrize("a,b", [(0.0, 0.0), (-0.6, 0.0), (-0.8, 0.0), (-0.4, 0.3)])
def test_moment_exactness(n, a, b):
    r = gauss_jacobi(n, a, b)
    mass = jacobi_moment(0, a, b)
    for m in range(2 * n):
        exact = jacobi_moment(m, a, b)
        approx = float(np.dot(r.weights, r.nodes ** m))
        # odd moments can vanish, so scale by the zeroth moment
        assert abs(approx - exact) <= 1e-12 * max(abs(exact), mass)


@pytest.mark.parametrize("n", [2, 4, 7, 11, 16])
def test_legendre_matches_bisection_roots(n):
    roots = legendre_roots_bisection(n)
    assert len(roots) == n
    np.testing.assert_allclose(gauss_legendre(n).nodes, roots, atol=1e-13)


@pytest.mark.parametrize("n", [5, 20, 50])
@pytest.mark.parametrize("a", [-0.95, -0.5, 0.0, 1.5])
def test_matches_scipy(n, a):
    x, w = roots_jacobi(n, a, 0.0)
    r = gauss_jacobi(n, a, 0.0)
    np.testing.assert_allclose(r.nodes, x, atol=1e-13)
    np.testing.assert_allclose(r.weights, w, rtol=1e-10)


@pytest.mark.parametrize("a", [0.0, -0.4, -0.8])
def test_refinement_consistency(a):
    f = lambda x: np.exp(x) * np.cos(3 * x)
    # v = (1 - x)**(1 + a) removes the endpoint singularity
    p = 1 / (1 + a)
    g = lambda v: p * mpmath.exp(1 - v ** p) * mpmath.cos(3 * (1 - v ** p))
    exact = float(mpmath.quad(g, [0, 2 ** (1 + a)]))
    for n in (2, 3, 4, 5, 6):
        e1 = abs(gauss_jacobi(n, a).integrate(f) - exact)
        e2 = abs(gauss_jacobi(2 * n, a).integrate(f) - exact)
        assert e1 > e2


@given(st.integers(1, 30), st.floats(-0.99, 3.0), st.floats(-0.99, 3.0))
def test_weight_sum_property(n, a, b):
    r = gauss_jacobi(n, a, b)
    mass = 2.0 ** (a + b + 1) * math.exp(math.lgamma(a + 1) + math.lgamma(b + 1) - math.lgamma(a + b + 2))
    assert r.weights.sum() == pytest.approx(mass, rel=1e-12)


@pytest.mark.parametrize("a,b", [(-1.0, 0.0), (0.0, -1.0), (-1.5, 0.2)])
def test_invalid_exponent(a, b):
    with pytest.raises(ValueError):
        gauss_jacobi(4, a, b)


def test_rule_is_immutable():
    r = gauss_jacobi(6, -0.3)
    with pytest.raises(ValueError):
        r.nodes[0] = 0.0


class TestAngular:
    def test_four_points(self):
        r = angular_rule(4)
        assert r.angles == pytest.approx([np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4])
        assert r.weights == pytest.approx([np.pi / 2] * 4)

    def test_cosine_vanishes(self):
        r = angular_rule(8)
        assert abs(np.dot(r.weights, np.cos(r.angles))) <= 1e-14

    def test_shifted_sine(self):
        r = angular_rule(16)
        val = np.dot(r.weights, 2 + np.sin(3 * r.angles))
        assert val == pytest.approx(4 * np.pi, abs=1e-12)

    @pytest.mark.parametrize("L", [4, 7, 32, 128])
    def test_invariants(self, L):
        r = angular_rule(L)
        assert np.all(np.diff(r.angles) > 0)
        assert r.angles[0] >= 0 and r.angles[-1] < 2 * np.pi
        assert r.weights.sum() == pytest.approx(2 * np.pi, abs=1e-12)

    @pytest.mark.parametrize("k", range(0, 12))
    def test_trig_exactness(self, k):
        r = angular_rule(12)
        exact = 2 * np.pi if k == 0 else 0.0
        assert np.dot(r.weights, np.cos(k * r.angles)) == pytest.approx(exact, abs=1e-12)
        assert abs(np.dot(r.weights, np.sin(k * r.angles))) <= 1e-12

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            angular_rule(3)
