"""One-dimensional Gauss rules and composite/graded variants.

All rules return ``(nodes, weights)``.  Interval endpoints may be arrays, in
which case the reference rule is broadcast along a trailing axis.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special


@lru_cache(maxsize=None)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_interval(n: int, a, b):
    """Gauss-Legendre rule on [a, b]; broadcasts over array-valued endpoints."""
    x, w = _leggauss(int(n))
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite(breaks, n: int):
    """Gauss-Legendre with ``n`` nodes on each consecutive pair of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    nodes, weights = gauss_interval(n, breaks[:-1], breaks[1:])
    return nodes.ravel(), weights.ravel()


def graded_breaks(a: float, b: float, levels: int, ratio: float = 0.5):
    """Breakpoints on [a, b] refined geometrically toward ``a``."""
    span = b - a
    inner = [a + span * ratio ** j for j in range(levels, 0, -1)]
    return np.array([a] + inner + [b])


@lru_cache(maxsize=None)
def _jacobi(n: int, beta: float):
    x, w = special.roots_jacobi(n, 0.0, beta)
    return x, w


def jacobi_radial(n: int, R: float, beta: float):
    """Rule for int_0^R r^beta g(r) dr; the weights absorb r^beta."""
    x, w = _jacobi(int(n), float(beta))
    r = 0.5 * R * (1.0 + x)
    return r, w * (0.5 * R) ** (beta + 1.0)


def periodic_peak_rule(n: int, delta: float):
    """Trapezoid rule on the circle, clustered around angle 0 at scale ``delta``.

    Uses the analytic circle map psi = 2 arctan(delta tan(pi x / 2)), which
    keeps the trapezoid rule spectrally accurate for analytic periodic
    integrands peaked at psi = 0.  Returns offsets in (-pi, pi) and weights
    summing to 2 pi.
    """
    delta = float(min(max(delta, 1e-8), 1.0))
    x = -1.0 + (2.0 * np.arange(n) + 1.0) / n
    t = np.tan(0.5 * np.pi * x)
    psi = 2.0 * np.arctan(delta * t)
    dpsi = np.pi * delta * (1.0 + t * t) / (1.0 + (delta * t) ** 2)
    return psi, dpsi * (2.0 / n)
