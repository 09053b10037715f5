"""Gauss-Jacobi rules (Golub-Welsch) and the periodic angular rule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for the weight ``(1-x)**a * (1+x)**b`` on (-1, 1)."""

    n: int
    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True)
class AngularRule:
    L: int
    angles: np.ndarray
    weights: np.ndarray


def _recurrence(n: int, a: float, b: float):
    # monic Jacobi three-term recurrence: diagonal and off-diagonal of the Jacobi matrix
    k = np.arange(n, dtype=float)
    ab = a + b
    diag = np.empty(n)
    s = 2.0 * k + ab
    with np.errstate(divide="ignore", invalid="ignore"):
        diag[:] = (b * b - a * a) / (s * (s + 2.0))
    diag[0] = (b - a) / (ab + 2.0)

    kk = np.arange(1, n, dtype=float)
    s = 2.0 * kk + ab
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4.0 * kk * (kk + a) * (kk + b) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0))
    if n > 1 and abs(ab + 1.0) < 1.0e-14:
        # k = 1 term has a removable 0/0 when a + b = -1
        off2[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) ** 2 * (3.0 + ab))
    return diag, np.sqrt(off2)


@lru_cache(maxsize=256)
def gauss_jacobi(n: int, a: float, b: float = 0.0) -> QuadratureRule:
    """Gauss-Jacobi rule with ``n`` points via the Golub-Welsch eigenproblem.

    Exact for polynomials of degree ``2n - 1`` against ``(1-x)**a (1+x)**b``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if a <= -1.0 or b <= -1.0:
        raise ValueError(f"Jacobi exponents must exceed -1, got a={a}, b={b}")
    a, b = float(a), float(b)
    diag, off = _recurrence(n, a, b)
    mu0 = math.exp((a + b + 1.0) * math.log(2.0) + betaln(a + 1.0, b + 1.0))
    if n == 1:
        nodes, vecs = diag.copy(), np.ones((1, 1))
    else:
        nodes, vecs = eigh_tridiagonal(diag, off)
    weights = mu0 * vecs[0, :] ** 2
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(n=n, a=a, b=b, nodes=nodes, weights=weights)


def gauss_legendre(n: int) -> QuadratureRule:
    return gauss_jacobi(n, 0.0, 0.0)


@lru_cache(maxsize=64)
def angular_rule(L: int) -> AngularRule:
    """Composite midpoint rule on ``[0, 2*pi)``.

    Exact for trigonometric polynomials of degree below ``L``.
    """
    if L < 4:
        raise ValueError("angular rule needs L >= 4")
    angles = (np.arange(L) + 0.5) * (2.0 * np.pi / L)
    weights = np.full(L, 2.0 * np.pi / L)
    angles.flags.writeable = False
    weights.flags.writeable = False
    return AngularRule(L=L, angles=angles, weights=weights)
