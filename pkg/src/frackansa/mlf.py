"""Gamma and the one-parameter Mittag-Leffler function.

:func:`mittag_leffler` evaluates

.. math::

    E_\\alpha(z) = \\sum_{n=0}^\\infty \\frac{z^n}{\\Gamma(\\alpha n + 1)}

for complex ``z``. Small arguments use the power series directly; everything
else goes through numerical inversion of the Laplace transform
``s^(alpha-1) / (s^alpha - z)`` on an optimal parabolic contour, with the
poles that fall to the right of the contour added back as residues
(R. Garrappa, SIAM J. Numer. Anal. 53 (2015) 1350-1369).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

_LOG_EPS = math.log(np.finfo(float).eps)
_DEFAULT_TOL = 1.0e-15
_SERIES_RADIUS = 1.0
_MAX_NODES = 200


class MittagLefflerError(ArithmeticError):
    """Raised when the contour scheme cannot certify the requested tolerance."""


class MittagLefflerOverflow(MittagLefflerError, OverflowError):
    """The value exceeds the double-precision range."""


@dataclass(frozen=True)
class MlEvaluation:
    alpha: float
    z: complex
    value: complex
    est_abs_error: float


def gamma(x: float) -> float:
    """Gamma function of a real argument.

    Negative non-integer arguments are allowed. Raises ``ValueError`` at the
    poles ``0, -1, -2, ...``.
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma has a pole at x={x:g}")
    if x < 0.5:
        # reflection keeps the relative accuracy for negative arguments
        return math.pi / (math.sin(math.pi * x) * math.gamma(1.0 - x))
    return math.gamma(x)


def _series(alpha: float, z: complex) -> complex:
    total = 0.0 + 0.0j
    zn = 1.0 + 0.0j
    n = 0
    while True:
        term = zn / math.gamma(alpha * n + 1.0)
        total += term
        if abs(term) < 1.0e-17 * max(abs(total), 1.0) and n > 2:
            return total
        n += 1
        zn *= z
        if n > 5000:
            raise MittagLefflerError("power series failed to converge")


def _params_bounded(t, phi_j, phi_j1, pj, qj, log_epsilon):
    # contour parameters for a region bounded by two singularities
    fac = 1.01
    f_max = math.exp(log_epsilon - _LOG_EPS)
    sq_phi_j = math.sqrt(phi_j)
    threshold = 2.0 * math.sqrt((log_epsilon - _LOG_EPS) / t)
    sq_phi_j1 = min(math.sqrt(phi_j1), threshold - sq_phi_j)

    f_bar = 1.0
    if pj < 1.0e-14 and qj < 1.0e-14:
        sq_bar_j, sq_bar_j1 = sq_phi_j, sq_phi_j1
    elif pj < 1.0e-14:
        sq_bar_j = sq_phi_j
        if sq_phi_j > 0:
            f_min = fac * (sq_phi_j / (sq_phi_j1 - sq_phi_j)) ** qj
        else:
            f_min = fac
        if f_min >= f_max:
            return None
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fq = f_bar ** (-1.0 / qj)
        sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq)
    elif qj < 1.0e-14:
        sq_bar_j1 = sq_phi_j1
        f_min = fac * (sq_phi_j1 / (sq_phi_j1 - sq_phi_j)) ** pj
        if f_min >= f_max:
            return None
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fp = f_bar ** (-1.0 / pj)
        sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp)
    else:
        f_min = fac * (sq_phi_j + sq_phi_j1) / (sq_phi_j1 - sq_phi_j) ** max(pj, qj)
        if f_min >= f_max:
            return None
        f_min = max(f_min, 1.5)
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fp = f_bar ** (-1.0 / pj)
        fq = f_bar ** (-1.0 / qj)
        w = -phi_j1 * t / log_epsilon
        den = 2.0 + w - (1.0 + w) * fp + fq
        sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den
        sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den

    log_epsilon = log_epsilon - math.log(f_bar)
    w = -(sq_bar_j1**2) * t / log_epsilon
    mu = (((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w)) ** 2
    h = (
        -2.0 * math.pi / log_epsilon * (sq_bar_j1 - sq_bar_j)
        / ((1.0 + w) * sq_bar_j + sq_bar_j1)
    )
    n = math.ceil(math.sqrt(1.0 - log_epsilon / t / mu) / h)
    return mu, h, n


def _params_unbounded(t, phi_j, pj, log_epsilon):
    # contour parameters for the region right of the last singularity
    sq_phi_j = math.sqrt(phi_j)
    phibar = phi_j * 1.01 if phi_j > 0 else 0.01
    sq_phibar = math.sqrt(phibar)
    f_min, f_max, f_tar = 1.0, 10.0, 5.0
    for _ in range(100):
        phi_t = phibar * t
        log_eps_phi_t = log_epsilon / phi_t
        n = math.ceil(phi_t / math.pi * (1.0 - 1.5 * log_eps_phi_t + math.sqrt(1.0 - 2.0 * log_eps_phi_t)))
        a = math.pi * n / phi_t
        sq_mu = sq_phibar * abs(4.0 - a) / abs(7.0 - math.sqrt(1.0 + 12.0 * a))
        fbar = ((sq_phibar - sq_phi_j) / sq_mu) ** (-pj)
        if pj < 1.0e-14 or f_min < fbar < f_max:
            break
        sq_phibar = f_tar ** (-1.0 / pj) * sq_mu + sq_phi_j
        phibar = sq_phibar**2
    mu = sq_mu**2
    h = (-3.0 * a - 2.0 + 2.0 * math.sqrt(1.0 + 12.0 * a)) / (4.0 - a) / n

    threshold = (log_epsilon - _LOG_EPS) / t
    if mu > threshold:
        q = 0.0 if abs(pj) < 1.0e-14 else f_tar ** (-1.0 / pj) * math.sqrt(mu)
        phibar = (q + math.sqrt(phi_j)) ** 2
        if phibar < threshold:
            w = math.sqrt(_LOG_EPS / (_LOG_EPS - log_epsilon))
            u = math.sqrt(-phibar * t / _LOG_EPS)
            mu = threshold
            n = math.ceil(w * log_epsilon / 2.0 / math.pi / (u * w - 1.0))
            h = w / n
        else:
            return None
    return mu, h, n


def _laplace_inversion(alpha: float, z: complex, log_epsilon: float) -> complex:
    t = 1.0
    theta = math.atan2(z.imag, z.real)
    kmin = math.ceil(-alpha / 2.0 - theta / (2.0 * math.pi))
    kmax = math.floor(alpha / 2.0 - theta / (2.0 * math.pi))
    k = np.arange(kmin, kmax + 1)
    poles = abs(z) ** (1.0 / alpha) * np.exp(1j * (theta + 2.0 * np.pi * k) / alpha)
    phi = (poles.real + np.abs(poles)) / 2.0
    order = np.argsort(phi, kind="stable")
    poles, phi = poles[order], phi[order]
    keep = phi > 1.0e-15
    poles, phi = poles[keep], phi[keep]

    # origin is the branch-point singularity
    s_star = np.concatenate(([0.0 + 0.0j], poles))
    phi = np.concatenate(([0.0], phi, [np.inf]))
    n_sing = len(s_star)
    p = [0.0] + [1.0] * (n_sing - 1)
    q = [1.0] * (n_sing - 1) + [np.inf]

    admissible = [
        j for j in range(n_sing)
        if phi[j] < (log_epsilon - _LOG_EPS) / t and phi[j] < phi[j + 1]
    ]

    while True:
        best = None
        for j in admissible:
            if j < n_sing - 1:
                params = _params_bounded(t, phi[j], phi[j + 1], p[j], q[j], log_epsilon)
            else:
                params = _params_unbounded(t, phi[j], p[j], log_epsilon)
            if params is not None and (best is None or params[2] < best[1][2]):
                best = (j, params)
        if best is not None and best[1][2] <= _MAX_NODES:
            break
        log_epsilon += math.log(10.0)
        if log_epsilon > -math.log(10.0) * 8:
            raise MittagLefflerError(f"no admissible contour for alpha={alpha}, z={z}")

    j, (mu, h, n) = best
    u = h * np.arange(-n, n + 1)
    s = mu * (1j * u + 1.0) ** 2
    ds = -2.0 * mu * u + 2.0j * mu
    f = np.exp(s * t) * s ** (alpha - 1.0) / (s**alpha - z) * ds
    integral = h * np.sum(f) / (2.0j * np.pi)
    with np.errstate(over="ignore", invalid="ignore"):
        residues = np.sum(np.exp(t * s_star[j + 1:])) / alpha
        value = complex(integral + residues)
    if not cmath.isfinite(value):
        raise MittagLefflerOverflow(f"E_{alpha:g}({z}) overflows")
    return value


def mittag_leffler(alpha: float, z: complex, tol: float = _DEFAULT_TOL) -> complex:
    """One-parameter Mittag-Leffler function :math:`E_\\alpha(z)`.

    Parameters
    ----------
    alpha : float
        Order, ``0 < alpha <= 2``.
    z : complex
        Argument. Real input still returns a complex number whose imaginary
        part is zero.
    tol : float
        Target accuracy of the contour quadrature.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    z = complex(z)
    if z == 0:
        return 1.0 + 0.0j
    if alpha == 1.0:
        try:
            return cmath.exp(z)
        except OverflowError:
            raise MittagLefflerOverflow(f"E_1({z}) overflows") from None
    if z.imag < 0.0:
        # E is real on the real axis, so E(conj z) = conj E(z); evaluating one
        # half-plane keeps conjugate eigenvalue pairs exactly paired
        return mittag_leffler(alpha, z.conjugate(), tol).conjugate()
    if abs(z) <= _SERIES_RADIUS:
        value = _series(alpha, z)
    else:
        value = _laplace_inversion(alpha, z, math.log(tol))
    if z.imag == 0.0:
        value = complex(value.real, 0.0)
    return value


def mittag_leffler_eval(alpha: float, z: complex) -> MlEvaluation:
    """Evaluate :func:`mittag_leffler` and attach an error estimate.

    The estimate is the difference between evaluations at two contour
    tolerances, floored at the double-precision rounding of the value.
    """
    value = mittag_leffler(alpha, z)
    if abs(complex(z)) <= _SERIES_RADIUS:
        err = 4.0 * np.finfo(float).eps * max(abs(value), 1.0)
    else:
        coarse = mittag_leffler(alpha, z, tol=1.0e-13)
        err = max(abs(coarse - value), np.finfo(float).eps * abs(value))
    return MlEvaluation(alpha=alpha, z=complex(z), value=value, est_abs_error=float(err))


def mittag_leffler_array(alpha: float, z) -> np.ndarray:
    """Elementwise :func:`mittag_leffler` over an array of arguments."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    flat_in, flat_out = z.ravel(), out.ravel()
    for i, zi in enumerate(flat_in):
        flat_out[i] = mittag_leffler(alpha, zi)
    return out
