"""Velocity grids, sphere rules and seeded Monte Carlo plans."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ConfigurationError, NonFiniteField, VarianceOverflow


@dataclass(frozen=True)
class VelocityGrid:
    """Cell-centred uniform grid on the cube [-v_max, v_max]^3."""

    v_max: float = 8.0
    n_per_axis: int = 64

    def __post_init__(self):
        if self.v_max <= 0:
            raise ConfigurationError("v_max must be positive")
        if int(self.n_per_axis) < 8:
            raise ConfigurationError("n_per_axis must be at least 8")

    @property
    def h(self) -> float:
        return 2.0 * self.v_max / self.n_per_axis

    @property
    def shape(self) -> tuple[int, int, int]:
        n = self.n_per_axis
        return (n, n, n)

    @property
    def axis(self) -> np.ndarray:
        return -self.v_max + self.h * (np.arange(self.n_per_axis) + 0.5)

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape (n, n, n, 3)."""
        a = self.axis
        return np.stack(np.meshgrid(a, a, a, indexing="ij"), axis=-1)

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Evaluate a vectorized function of velocity on all nodes."""
        return np.asarray(fn(self.nodes), dtype=float)

    def index_of(self, v) -> tuple[int, int, int]:
        """Index of the node nearest to ``v``."""
        idx = np.rint((np.asarray(v, dtype=float) + self.v_max) / self.h - 0.5).astype(int)
        idx = np.clip(idx, 0, self.n_per_axis - 1)
        return tuple(int(i) for i in idx)

    def to_fractional(self, v: np.ndarray) -> np.ndarray:
        """Fractional index coordinates of points, shape (3, ...)."""
        v = np.asarray(v, dtype=float)
        return np.moveaxis((v + self.v_max) / self.h - 0.5, -1, 0)

    def key(self) -> dict:
        return {"v_max": float(self.v_max), "n_per_axis": int(self.n_per_axis)}


def integrate_velocity(grid: VelocityGrid, f: np.ndarray) -> float:
    """Midpoint rule for the integral of ``f`` over the truncated cube."""
    f = np.asarray(f, dtype=float)
    if f.shape[:3] != grid.shape:
        raise ConfigurationError("field shape does not match the grid")
    if not np.all(np.isfinite(f)):
        raise NonFiniteField("field has non-finite values")
    return float(np.sum(f) * grid.h ** 3)


@dataclass(frozen=True)
class SphereRule:
    """Quadrature on the unit sphere: nodes (m, 3) and positive weights (m,)."""

    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if abs(float(np.sum(self.weights)) - 4.0 * np.pi) > 1e-10:
            raise ConfigurationError("sphere weights must sum to 4 pi")
        if np.any(np.abs(np.linalg.norm(self.nodes, axis=1) - 1.0) > 1e-12):
            raise ConfigurationError("sphere nodes must be unit vectors")

    @classmethod
    def product(cls, n_theta: int = 32, n_phi: int = 64) -> "SphereRule":
        """Gauss-Legendre in cos(theta) times the uniform rule in azimuth."""
        c, wc = np.polynomial.legendre.leggauss(n_theta)
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        s = np.sqrt(1.0 - c * c)
        nodes = np.stack([
            np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)), np.outer(c, np.ones(n_phi))
        ], axis=-1).reshape(-1, 3)
        weights = np.outer(wc, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
        return cls(nodes=nodes, weights=weights,
                   exactness_degree=int(min(2 * n_theta - 1, n_phi - 1)),
                   params={"n_theta": n_theta, "n_phi": n_phi})

    def rotated(self, rotation: np.ndarray) -> "SphereRule":
        nodes = self.nodes @ np.asarray(rotation, dtype=float).T
        nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
        return SphereRule(nodes=nodes, weights=self.weights,
                          exactness_degree=self.exactness_degree, params=self.params)

    def key(self) -> dict:
        return dict(self.params)


def sphere_integrate(rule: SphereRule, g) -> float:
    """Sum of w_i g(sigma_i); ``g`` is a callable on (m, 3) or an array of node values."""
    vals = np.asarray(g(rule.nodes) if callable(g) else g, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteField("integrand has non-finite values on the sphere")
    return float(np.dot(rule.weights, vals))


@dataclass(frozen=True)
class MonteCarloPlan:
    """Seeded importance-sampling plan.

    ``proposal`` is ``"gaussian"`` (isotropic normal with standard deviation
    ``scale``) or ``"uniform-ball"`` (uniform in the ball of radius ``radius``).
    """

    sample_count: int = 10_000
    seed: int = 0
    proposal: str = "gaussian"
    scale: float = 1.0
    radius: float = 4.0

    def __post_init__(self):
        if self.sample_count <= 0:
            raise ConfigurationError("sample_count must be positive")
        if self.proposal not in ("gaussian", "uniform-ball"):
            raise ConfigurationError(f"unknown proposal {self.proposal!r}")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ConfigurationError("seed must be a 64-bit unsigned integer")

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([int(self.seed), int(stream)])

    def _velocity(self, rng, n):
        if self.proposal == "gaussian":
            x = rng.standard_normal((n, 3)) * self.scale
            logp = (-0.5 * np.sum(x * x, axis=1) / self.scale ** 2
                    - 1.5 * np.log(2.0 * np.pi * self.scale ** 2))
            return x, np.exp(-logp)
        d = rng.standard_normal((n, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.random(n) ** (1.0 / 3.0)
        vol = 4.0 / 3.0 * np.pi * self.radius ** 3
        return d * r[:, None], np.full(n, vol)

    def draw(self, n_velocities: int = 1, n_directions: int = 0, stream: int = 0):
        """Draw samples.

        Returns
        -------
        velocities : list of (N, 3) arrays
        directions : list of (N, 3) unit-vector arrays (uniform on the sphere)
        weight : (N,) array
            Reciprocal joint proposal density.
        """
        rng = self.rng(stream)
        n = int(self.sample_count)
        vels, weight = [], np.ones(n)
        for _ in range(n_velocities):
            x, iw = self._velocity(rng, n)
            vels.append(x)
            weight = weight * iw
        dirs = []
        for _ in range(n_directions):
            d = rng.standard_normal((n, 3))
            dirs.append(d / np.linalg.norm(d, axis=1, keepdims=True))
            weight = weight * 4.0 * np.pi
        return vels, dirs, weight

    def key(self) -> dict:
        return {"samples": int(self.sample_count), "seed": int(self.seed),
                "proposal": self.proposal, "scale": float(self.scale),
                "radius": float(self.radius)}


def mean_and_error(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error with a non-finite guard."""
    values = np.asarray(values, dtype=float)
    n = values.size
    est = float(np.sum(values) / n)
    if n < 2:
        return est, 0.0
    with np.errstate(invalid="ignore", over="ignore"):
        var = float(np.sum((values - est) ** 2) / (n - 1))
    if not (np.isfinite(est) and np.isfinite(var)):
        raise VarianceOverflow("Monte Carlo variance is not finite")
    return est, float(np.sqrt(var / n))


def mc_estimate(plan: MonteCarloPlan, integrand: Callable, n_velocities: int = 1,
                n_directions: int = 0, stream: int = 0,
                weighted: bool = True) -> tuple[float, float]:
    """Monte Carlo estimate with standard error.

    With ``weighted=True`` the integral of ``integrand(*velocities, *directions)``
    over (R^3)^n x (S^2)^m is estimated by importance sampling.  With
    ``weighted=False`` the plain expectation under the proposal is returned.
    """
    vels, dirs, weight = plan.draw(n_velocities, n_directions, stream)
    vals = np.asarray(integrand(*vels, *dirs), dtype=float)
    vals = np.broadcast_to(vals, weight.shape)
    return mean_and_error(vals * weight if weighted else vals)
