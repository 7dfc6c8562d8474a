"""Maxwellian, velocity weights, weighted norms, projection onto ker L, entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NegativeDensity, NonFiniteField
from .grids import VelocityGrid, integrate_velocity

MU0 = (2.0 * np.pi) ** -1.5


def bracket(v) -> np.ndarray:
    """Japanese bracket <v> = (1 + |v|^2)^(1/2) for arrays of shape (..., 3)."""
    v = np.asarray(v, dtype=float)
    return np.sqrt(1.0 + np.sum(v * v, axis=-1))


def maxwellian(v):
    """Standard Maxwellian (2 pi)^(-3/2) exp(-|v|^2 / 2)."""
    v = np.asarray(v, dtype=float)
    out = MU0 * np.exp(-0.5 * np.sum(v * v, axis=-1))
    return float(out) if out.ndim == 0 else out


def maxwellian_radial(r):
    r = np.asarray(r, dtype=float)
    return MU0 * np.exp(-0.5 * r * r)


@dataclass(frozen=True)
class PolyWeight:
    """<v>^k."""

    k: float

    def __call__(self, v):
        return bracket(v) ** self.k

    def radial(self, r):
        return (1.0 + np.asarray(r, dtype=float) ** 2) ** (0.5 * self.k)

    @property
    def grows(self) -> bool:
        return self.k > 0


@dataclass(frozen=True)
class ExpWeight:
    """<v>^k exp(a <v>^b_exp) with a > 0 and 0 < b_exp < 2."""

    k: float
    a: float
    b_exp: float

    def __post_init__(self):
        if not (0.0 < self.b_exp < 2.0):
            raise ConfigurationError("b_exp must satisfy 0 < b_exp < 2")
        if self.a <= 0:
            raise ConfigurationError("a must be positive")

    def __call__(self, v):
        br = bracket(v)
        return br ** self.k * np.exp(self.a * br ** self.b_exp)

    def radial(self, r):
        br = np.sqrt(1.0 + np.asarray(r, dtype=float) ** 2)
        return br ** self.k * np.exp(self.a * br ** self.b_exp)

    @property
    def grows(self) -> bool:
        return True


def n_selector(gamma: float) -> int:
    """Number of derivatives N used by the weight ladder."""
    if -1.5 < gamma <= 1.0:
        return 2
    if -2.5 < gamma <= -1.5:
        return 3
    if -3.0 < gamma <= -2.5:
        return 4
    raise ConfigurationError(f"gamma {gamma} outside (-3, 1]")


LADDER_EPS = 1e-2


@dataclass(frozen=True)
class WeightLadder:
    """Derivative weights w(|alpha|, |beta|) = <v>^(k - a|alpha| - b|beta| + c)."""

    gamma: float
    k: float

    @property
    def a(self) -> float:
        return 6.0 * max(-self.gamma, 0.0)

    @property
    def b(self) -> float:
        return 7.0 * max(-self.gamma, 0.0)

    @property
    def c(self) -> float:
        return 4.0 * self.b

    @property
    def N(self) -> int:
        return n_selector(self.gamma)

    def exponent(self, alpha: int, beta: int) -> float:
        return self.k - self.a * alpha - self.b * beta + self.c

    def __call__(self, v, alpha: int, beta: int):
        return bracket(v) ** self.exponent(alpha, beta)

    @staticmethod
    def constant(alpha: int, beta: int, eps: float = LADDER_EPS) -> float:
        """C_{|alpha|,|beta|} = eps^(2|beta| - |alpha|)."""
        return eps ** (2 * beta - alpha)

    def check_properties(self, v) -> dict:
        """Evaluate the ladder inequalities pointwise; each entry is max(lhs/rhs)."""
        br = bracket(v)
        lb = np.log(br)

        def w(al, be):
            return self.exponent(al, be) * lb

        out = {}
        worst = -np.inf
        for al in range(0, 5):
            for be in range(1, 5):
                worst = max(worst, np.max(w(al, be) - w(al, be - 1)))
                worst = max(worst, np.max(w(al + 1, be) - w(al, be)))
        out["monotone"] = float(np.exp(worst))
        step = -np.inf
        for al in range(0, 4):
            for be in range(1, 5):
                rhs = min(self.gamma, 0.0) * lb + w(al + 1, be - 1)
                step = max(step, np.max(w(al, be) - rhs))
        out["ladder_step"] = float(np.exp(step))
        lhs3 = max(np.max(2 * w(al, 3 - al) - (w(0, 2) + w(1, 2))) for al in range(4))
        out["ab3"] = float(np.exp(lhs3))
        rhs4 = np.minimum.reduce([0.8 * w(1, 2) + 1.2 * w(2, 2), w(1, 2) + w(2, 2),
                                  w(0, 3) + w(1, 3)])
        lhs4 = max(np.max(2 * w(al, 4 - al) - rhs4) for al in range(5))
        out["ab4"] = float(np.exp(lhs4))
        base = max(np.max(self.k * lb - w(al, be)) for al in range(5) for be in range(5 - al))
        out["base"] = float(np.exp(base))
        return out


def norm_weighted_L2(grid: VelocityGrid, f, weight) -> float:
    """(int |f|^2 w^2 dv)^(1/2) on the grid."""
    f = np.asarray(f, dtype=float)
    w = np.asarray(weight(grid.nodes), dtype=float)
    integrand = (f * w) ** 2
    if not np.all(np.isfinite(integrand)):
        raise NonFiniteField("weighted integrand is not finite")
    return float(np.sqrt(integrate_velocity(grid, integrand)))


def truncation_tail(grid: VelocityGrid, f, weight) -> float:
    """Weighted L2 mass carried by the outermost layer of cells.

    Used as an auditable proxy for the part of the norm lost to truncation.
    """
    f = np.asarray(f, dtype=float)
    w = np.asarray(weight(grid.nodes), dtype=float)
    dens = (f * w) ** 2
    mask = np.zeros(grid.shape, dtype=bool)
    mask[[0, -1], :, :] = True
    mask[:, [0, -1], :] = True
    mask[:, :, [0, -1]] = True
    return float(np.sqrt(np.sum(dens[mask]) * grid.h ** 3))


def norm_report(grid: VelocityGrid, f, weight) -> dict:
    out = {"value": norm_weighted_L2(grid, f, weight)}
    if getattr(weight, "grows", False):
        out["tail"] = truncation_tail(grid, f, weight)
    return out


def kernel_basis(grid: VelocityGrid) -> list[np.ndarray]:
    """Basis of ker L orthonormal in L^2(mu^{-1})."""
    v = grid.nodes
    mu = maxwellian(v)
    sq = np.sum(v * v, axis=-1)
    return [mu, v[..., 0] * mu, v[..., 1] * mu, v[..., 2] * mu, (sq - 3.0) * mu / np.sqrt(6.0)]


def projection_P(grid: VelocityGrid, f) -> np.ndarray:
    """Orthogonal projection onto ker L in L^2(mu^{-1})."""
    f = np.asarray(f, dtype=float)
    v = grid.nodes
    mu = maxwellian(v)
    out = np.zeros_like(f)
    for phi in kernel_basis(grid):
        coef = integrate_velocity(grid, f * phi / mu)
        out += coef * phi
    return out


@dataclass(frozen=True)
class ConservedMoments:
    mass: float
    momentum: tuple
    energy: float


def moments(grid: VelocityGrid, F) -> ConservedMoments:
    F = np.asarray(F, dtype=float)
    v = grid.nodes
    mom = tuple(integrate_velocity(grid, F * v[..., i]) for i in range(3))
    return ConservedMoments(mass=integrate_velocity(grid, F), momentum=mom,
                            energy=integrate_velocity(grid, F * np.sum(v * v, axis=-1)))


DENSITY_FLOOR = 1e-300


def _xlogx(x):
    x = np.where(x < DENSITY_FLOOR, 0.0, x)
    return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def relative_entropy(grid: VelocityGrid, F) -> float:
    """H(F) = int F ln F - mu ln mu, with 0 ln 0 = 0."""
    F = np.asarray(F, dtype=float)
    if np.any(F < 0):
        raise NegativeDensity("relative entropy needs F >= 0")
    mu = maxwellian(grid.nodes)
    return integrate_velocity(grid, _xlogx(F) - _xlogx(mu))


def entropy_csiszar_control(grid: VelocityGrid, F) -> tuple[float, float]:
    """Quadratic part on {|F - mu| <= mu} and L^1 part on {|F - mu| >= mu}."""
    F = np.asarray(F, dtype=float)
    if np.any(F < 0):
        raise NegativeDensity("entropy control needs F >= 0")
    mu = maxwellian(grid.nodes)
    d = np.abs(F - mu)
    small = d <= mu
    quad = np.where(small, d * d / (4.0 * np.where(mu > 0, mu, 1.0)), 0.0)
    lin = np.where(d >= mu, 0.25 * d, 0.0)
    return integrate_velocity(grid, quad), integrate_velocity(grid, lin)


def exp_weight_profile(x, k: float, a: float, b: float):
    """f(x) = a (1 + x)^(b/2) - (k/2) ln(1 + x), the exponent of e^{a<v>^b} <v>^{-k} at x = |v|^2."""
    x = np.asarray(x, dtype=float)
    return a * (1.0 + x) ** (0.5 * b) - 0.5 * k * np.log1p(x)


def exp_weight_constants(k: float, a: float, b: float) -> tuple[float, float]:
    """Constants of the two inequalities for exp_weight_profile.

    Returns ``(C1, C2)`` with f(c) <= f(d) + C1 for c <= d and
    f(c + d) <= f(c) + f(d) + C2.  C1 = f(0) - min f; C2 follows from
    integrating the positive part of f'' over [0, x_f]^2 where x_f is the
    inflection point, minus f(0).
    """
    # f'(x) = 0 at (1+x)^(b/2) = k / (a b)
    e = (k / (a * b)) ** (2.0 / b) - 1.0 if k > 0 else -1.0
    f0 = float(exp_weight_profile(0.0, k, a, b))
    c1 = f0 - float(exp_weight_profile(e, k, a, b)) if e > 0 else 0.0
    # f''(x) >= 0 iff (1+x)^(b/2) <= k / (a b (1 - b/2))
    if k > 0:
        xf = (k / (a * b * (1.0 - 0.5 * b))) ** (2.0 / b) - 1.0
    else:
        xf = -1.0
    if xf <= 0:
        return c1, 0.0
    # int_0^X int_0^X f''(x+s) ds dx = f(2X) - 2 f(X) + f(0), with f'' >= 0 on [0, 2X] only
    # when 2X <= x_f; bound by the positive part using the convex piece.
    X = xf
    lo = np.linspace(0.0, 2.0 * X, 4097)
    fpp = (a * 0.5 * b * (0.5 * b - 1.0) * (1.0 + lo) ** (0.5 * b - 2.0)
           + 0.5 * k / (1.0 + lo) ** 2)
    fpp = np.maximum(fpp, 0.0)
    # area of [0,X]^2 with x + s = y has density min(y, 2X - y) on y in [0, 2X]
    dens = np.minimum(lo, 2.0 * X - lo)
    c2 = float(np.trapezoid(fpp * dens, lo)) - f0
    return c1, max(c2, 0.0)
