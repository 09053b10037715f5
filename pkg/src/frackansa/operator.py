"""Multiquadric basis and its derivative kernels.

The fractional directional derivative of order ``beta`` in (1, 2] applied to
a basis function centred at ``q`` and evaluated at ``p`` is

    1/Gamma(2-beta) * int_0^d  s**(1-beta) * g''(s) ds,
    g(s) = phi(|p - s*e - q|),

with ``e = (cos theta, sin theta)`` and ``d`` the distance from ``p`` to the
boundary along ``-e``. Substituting ``s = d(1 - xi)/2`` turns the weight into
the Jacobi weight ``(1 - xi)**(1-beta)``.

For small shape parameters ``g''`` is a narrow bump of width
``sqrt(perp**2 + c**2)`` around the closest approach of the ray to ``q``, so
the default integrator splits ``[0, d]`` into panels graded by a factor of
three toward that point: Gauss-Jacobi on the panel touching ``s = 0`` and
Gauss-Legendre elsewhere, ``K`` points each. ``panels=False`` gives the
single Gauss-Jacobi sum over the whole ray.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba
import numpy as np

# OpenMP first: the TBB layer shipped with some distributions is too old and
# only produces a warning before numba falls back anyway
numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

from .geometry import Domain, direction
from .mlf import gamma
from .quadrature import AngularRule, QuadratureRule, gauss_jacobi, gauss_legendre

DEFAULT_K = 20
_MAX_BREAKS = 96


class OrderError(ValueError):
    pass


def _apply_thread_cap() -> None:
    cap = int(os.environ.get("FRAC_KANSA_THREADS", "0") or 0)
    if cap > 0:
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))


@dataclass(frozen=True)
class RbfBasis:
    centers: np.ndarray
    shape_c: float

    def __post_init__(self):
        if not self.shape_c > 0:
            raise ValueError("MQ shape parameter must be positive")


@dataclass(frozen=True)
class MixingMeasure:
    """Directional weights for the vector fractional operator.

    ``continuous`` measures give a weight function ``m(theta)`` and order
    function ``beta(theta)``, both sampled at the angular rule nodes.
    ``discrete`` measures give explicit directions, weights and orders.
    """

    form: str
    weight: object = None
    order: object = None
    thetas: tuple = ()
    weights: tuple = ()
    orders: tuple = ()

    @classmethod
    def continuous(cls, weight, order) -> "MixingMeasure":
        w = weight if callable(weight) else (lambda th, v=float(weight): np.full_like(th, v))
        o = order if callable(order) else (lambda th, v=float(order): np.full_like(th, v))
        return cls(form="continuous", weight=w, order=o)

    @classmethod
    def discrete(cls, thetas, weights, orders) -> "MixingMeasure":
        thetas, weights = tuple(map(float, thetas)), tuple(map(float, weights))
        if np.isscalar(orders):
            orders = (float(orders),) * len(thetas)
        m = cls(form="discrete", thetas=thetas, weights=weights, orders=tuple(map(float, orders)))
        m.validate()
        return m

    def validate(self) -> None:
        if self.form == "discrete":
            w = np.asarray(self.weights)
            if not (len(w) == len(self.thetas) == len(self.orders)):
                raise ValueError("discrete measure needs matching thetas, weights, orders")
            if np.any(~np.isfinite(w)) or np.any(w < 0) or not np.any(w > 0):
                raise ValueError("discrete weights must be finite, nonnegative, one positive")
            for b in self.orders:
                _check_order(b)
        elif self.form != "continuous":
            raise ValueError(f"unknown measure form {self.form!r}")

    def sample(self, angular: AngularRule | None):
        """Return (thetas, effective weights, orders) for the operator sum."""
        if self.form == "discrete":
            return np.array(self.thetas), np.array(self.weights), np.array(self.orders)
        th = angular.angles
        m = np.asarray(self.weight(th), dtype=float)
        b = np.asarray(self.order(th), dtype=float)
        if np.any(m < 0):
            raise ValueError("continuous mixing weight must be nonnegative")
        for bb in np.unique(b):
            _check_order(bb)
        return th, m * angular.weights, b


def _check_order(beta: float) -> None:
    if not 1.0 < beta <= 2.0:
        raise OrderError(f"fractional order must lie in (1, 2], got {beta}")


def mq(r, c):
    return np.sqrt(np.asarray(r) ** 2 + c * c)


def _diff(p, q):
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    return p[:, None, 0] - q[None, :, 0], p[:, None, 1] - q[None, :, 1]


def mq_matrix(p, q, c) -> np.ndarray:
    dx, dy = _diff(p, q)
    return np.sqrt(dx * dx + dy * dy + c * c)


def mq_dx(p, q, c) -> np.ndarray:
    dx, dy = _diff(p, q)
    return dx / np.sqrt(dx * dx + dy * dy + c * c)


def mq_dy(p, q, c) -> np.ndarray:
    dx, dy = _diff(p, q)
    return dy / np.sqrt(dx * dx + dy * dy + c * c)


@numba.njit(cache=True, inline="always")
def _g2(a, w2):
    # second derivative of sqrt(a**2 + w2) with respect to a
    s = a * a + w2
    return w2 / (s * math.sqrt(s))


@numba.njit(cache=True)
def _ray_integral(a0, w2, d, beta, gj_x, gj_w, gl_x, gl_w, use_panels, breaks):
    # int_0^d s**(1-beta) g''(a0 - s) ds
    if d <= 0.0:
        return 0.0
    gexp = 1.0 - beta
    if not use_panels:
        h = 0.5 * d
        acc = 0.0
        for k in range(gj_x.shape[0]):
            acc += gj_w[k] * _g2(a0 - h * (1.0 - gj_x[k]), w2)
        return h ** (2.0 - beta) * acc

    star = min(max(a0, 0.0), d)
    off = a0 - star
    weff = math.sqrt(off * off + w2)

    # breakpoints graded by 3 on both sides of the closest-approach point
    step = weff
    nl = 0
    while star - step > 0.0:
        nl += 1
        step *= 3.0
    nb = 0
    breaks[nb] = 0.0
    nb += 1
    step = weff * 3.0 ** (nl - 1)
    for _ in range(nl):
        breaks[nb] = star - step
        nb += 1
        step /= 3.0
    step = weff
    while star + step < d and nb < breaks.shape[0] - 1:
        breaks[nb] = star + step
        nb += 1
        step *= 3.0
    breaks[nb] = d
    nb += 1
    # a sliver next to s = 0 would spoil the s**(1-beta) factor on its neighbour
    while nb > 2 and breaks[1] < breaks[2] / 3.0:
        for k in range(1, nb - 1):
            breaks[k] = breaks[k + 1]
        nb -= 1

    # first panel carries the endpoint singularity
    p1 = breaks[1]
    h = 0.5 * p1
    acc = 0.0
    for k in range(gj_x.shape[0]):
        acc += gj_w[k] * _g2(a0 - h * (1.0 - gj_x[k]), w2)
    total = h ** (2.0 - beta) * acc
    for m in range(1, nb - 1):
        u = breaks[m]
        v = breaks[m + 1]
        mid = 0.5 * (u + v)
        half = 0.5 * (v - u)
        acc = 0.0
        for k in range(gl_x.shape[0]):
            s = mid + half * gl_x[k]
            acc += gl_w[k] * s**gexp * _g2(a0 - s, w2)
        total += half * acc
    return total


@numba.njit(cache=True, parallel=True)
def _directional_block(px, py, qx, qy, ex, ey, dist, beta, c, gj_x, gj_w, gl_x, gl_w,
                       use_panels, exact_second):
    n, m = px.shape[0], qx.shape[0]
    out = np.zeros((n, m))
    c2 = c * c
    for i in numba.prange(n):
        breaks = np.empty(_MAX_BREAKS)
        for j in range(m):
            dx = px[i] - qx[j]
            dy = py[i] - qy[j]
            a0 = dx * ex + dy * ey
            perp = dx * ey - dy * ex
            w2 = perp * perp + c2
            if exact_second:
                out[i, j] = _g2(a0, w2)
            else:
                out[i, j] = _ray_integral(a0, w2, dist[i], beta, gj_x, gj_w, gl_x, gl_w,
                                          use_panels, breaks)
    return out


def _rules_for(beta: float, K: int):
    gj = gauss_jacobi(K, 1.0 - beta, 0.0)
    gl = gauss_legendre(K)
    return gj, gl


def frac_directional_matrix(points, centers, c: float, beta: float, theta: float,
                            domain: Domain, K: int = DEFAULT_K, *, panels: bool = True,
                            rule: QuadratureRule | None = None) -> np.ndarray:
    """Directional fractional derivative of every basis function at every point.

    Returns an array of shape ``(len(points), len(centers))``.
    """
    _check_order(beta)
    _apply_thread_cap()
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    centers = np.ascontiguousarray(np.atleast_2d(centers), dtype=float)
    ex, ey = direction(theta)
    dist = np.ascontiguousarray(domain.exit_distance(points, theta))
    exact = beta == 2.0
    if exact:
        gj_x = gj_w = gl_x = gl_w = np.zeros(1)
    else:
        gj, gl = _rules_for(beta, K)
        if rule is not None:
            if abs(rule.a - (1.0 - beta)) > 1e-14 or rule.b != 0.0:
                raise ValueError("quadrature rule must be built with a = 1 - beta, b = 0")
            gj = rule
            gl = gauss_legendre(rule.n)
        gj_x, gj_w, gl_x, gl_w = gj.nodes, gj.weights, gl.nodes, gl.weights
    out = _directional_block(points[:, 0], points[:, 1], centers[:, 0], centers[:, 1],
                             ex, ey, dist, float(beta), float(c),
                             np.ascontiguousarray(gj_x), np.ascontiguousarray(gj_w),
                             np.ascontiguousarray(gl_x), np.ascontiguousarray(gl_w),
                             bool(panels), exact)
    if not exact:
        out /= gamma(2.0 - beta)
    return out


def frac_axis_matrix(points, centers, c: float, beta: float, axis: str, domain: Domain,
                     K: int = DEFAULT_K, **kw) -> np.ndarray:
    """Axis-aligned fractional derivative, integrated from the lower domain edge."""
    theta = {"x": 0.0, "y": 0.5 * math.pi}[axis]
    return frac_directional_matrix(points, centers, c, beta, theta, domain, K, **kw)


def frac_mixed_matrix(points, centers, c: float, measure: MixingMeasure, domain: Domain,
                      K: int = DEFAULT_K, angular: AngularRule | None = None,
                      **kw) -> np.ndarray:
    """Mixing-measure combination of directional derivatives."""
    measure.validate()
    thetas, weights, orders = measure.sample(angular)
    out = np.zeros((len(np.atleast_2d(points)), len(np.atleast_2d(centers))))
    for th, w, b in zip(thetas, weights, orders):
        if w == 0.0:
            continue
        out += w * frac_directional_matrix(points, centers, c, b, th, domain, K, **kw)
    return out


# scalar entry points, one (evaluation node, center) pair at a time

def mq_dx_entry(p, q, c: float) -> float:
    return float(mq_dx(p, q, c)[0, 0])


def mq_dy_entry(p, q, c: float) -> float:
    return float(mq_dy(p, q, c)[0, 0])


def frac_axis_entry(p, q, beta: float, axis: str, domain: Domain, c: float,
                    K: int = DEFAULT_K, **kw) -> float:
    return float(frac_axis_matrix(p, q, c, beta, axis, domain, K, **kw)[0, 0])


def frac_directional_entry(p, q, beta: float, theta: float, domain: Domain, c: float,
                           K: int = DEFAULT_K, **kw) -> float:
    return float(frac_directional_matrix(p, q, c, beta, theta, domain, K, **kw)[0, 0])


def frac_mixed_entry(p, q, measure: MixingMeasure, domain: Domain, c: float,
                     K: int = DEFAULT_K, angular: AngularRule | None = None, **kw) -> float:
    return float(frac_mixed_matrix(p, q, c, measure, domain, K, angular, **kw)[0, 0])
