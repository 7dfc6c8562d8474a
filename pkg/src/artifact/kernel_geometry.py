"""Collision kernel B(v - v*, sigma) and the elastic collision geometry.

The sigma-representation is used throughout::

    v'  = (v + v*)/2 + |v - v*| sigma / 2
    v*' = (v + v*)/2 - |v - v*| sigma / 2

with cos(theta) = k . sigma and k = (v - v*)/|v - v*|.  When v = v* the
deviation angle is defined by cos(theta) = 1 (identity collision).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    AlreadySymmetrized,
    ConfigurationError,
    DegenerateDirection,
    SingularRelativeVelocity,
)

Profile = Callable[[np.ndarray], np.ndarray]


def profile_one(c):
    """Constant angular profile b = 1."""
    return np.ones_like(np.asarray(c, dtype=float))


def profile_linear(c):
    """Angular profile b(c) = 1 + c (not even; used to exercise symmetrization)."""
    return 1.0 + np.asarray(c, dtype=float)


def profile_square(c):
    """Angular profile b(c) = c**2."""
    return np.asarray(c, dtype=float) ** 2


NAMED_PROFILES = {"one": profile_one, "linear": profile_linear, "square": profile_square}


class _SymmetrizedProfile:
    """(b(c) + b(-c)) restricted to c >= 0; a class so that specs stay picklable."""

    def __init__(self, base: Profile):
        self.base = base

    def __call__(self, c):
        c = np.asarray(c, dtype=float)
        return np.where(c >= 0.0, self.base(c) + self.base(-c), 0.0)


@dataclass(frozen=True)
class CollisionKernelSpec:
    """Cutoff kernel B = |v - v*|^gamma b(cos theta).

    Parameters
    ----------
    gamma : float
        Kinetic exponent, -3 < gamma <= 1.
    angular_profile : callable
        Vectorized b(c) for c = cos(theta), nonnegative.
    cutoff_lower : float
        Constant K of the cutoff assumption K <= b <= 1/K on the support.
    support_restricted : bool
        When true, b vanishes for theta > pi/2 (c < 0).
    profile_tag : str
        Stable name of the profile, used in cache keys and run hashes.
    """

    gamma: float = 0.0
    angular_profile: Profile = field(default=profile_one, compare=False)
    cutoff_lower: float = 1.0
    support_restricted: bool = True
    profile_tag: str = "one"

    def __post_init__(self):
        if not (-3.0 < self.gamma <= 1.0):
            raise ConfigurationError(f"gamma must lie in (-3, 1], got {self.gamma}")
        if not (0.0 < self.cutoff_lower <= 1.0):
            raise ConfigurationError("cutoff_lower K must lie in (0, 1]")
        c = self.support_nodes(65)
        vals = np.asarray(self.angular_profile(c), dtype=float)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ConfigurationError("angular profile must be finite and nonnegative")
        if np.any(vals > 1.0 / self.cutoff_lower + 1e-12):
            raise ConfigurationError("angular profile exceeds the cutoff bound 1/K")

    @classmethod
    def named(cls, gamma: float, profile: str = "one", cutoff_lower: float = 1.0,
              support_restricted: bool = True) -> "CollisionKernelSpec":
        if profile not in NAMED_PROFILES:
            raise ConfigurationError(f"unknown angular profile {profile!r}")
        return cls(gamma=float(gamma), angular_profile=NAMED_PROFILES[profile],
                   cutoff_lower=cutoff_lower, support_restricted=support_restricted,
                   profile_tag=profile)

    @property
    def c_interval(self) -> tuple[float, float]:
        return (0.0, 1.0) if self.support_restricted else (-1.0, 1.0)

    def support_nodes(self, n: int) -> np.ndarray:
        lo, hi = self.c_interval
        return np.linspace(lo, hi, n)

    def b(self, c) -> np.ndarray:
        """Angular profile with the support restriction applied."""
        c = np.asarray(c, dtype=float)
        vals = np.asarray(self.angular_profile(c), dtype=float)
        if self.support_restricted:
            vals = np.where(c >= 0.0, vals, 0.0)
        return vals

    def satisfies_cutoff(self, n: int = 257) -> bool:
        """Check K <= b(c) <= 1/K on the support."""
        vals = self.b(self.support_nodes(n))
        K = self.cutoff_lower
        return bool(np.all(vals >= K - 1e-12) and np.all(vals <= 1.0 / K + 1e-12))

    def angular_norm(self, n: int = 64) -> float:
        """||b||_{L^1(S^2)} = 2 pi int b(c) dc over the support."""
        x, w = np.polynomial.legendre.leggauss(n)
        lo, hi = self.c_interval
        c = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        return float(2.0 * np.pi * 0.5 * (hi - lo) * np.dot(w, self.b(c)))

    def key(self) -> dict:
        return {"gamma": float(self.gamma), "profile": self.profile_tag,
                "K": float(self.cutoff_lower), "restricted": bool(self.support_restricted)}


@dataclass(frozen=True)
class CollisionPair:
    v: np.ndarray
    v_star: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        for name in ("v", "v_star", "sigma"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(3)
            object.__setattr__(self, name, arr)
        if abs(np.linalg.norm(self.sigma) - 1.0) > 1e-12:
            raise ConfigurationError("sigma must be a unit vector")


@dataclass(frozen=True)
class PostCollisionVelocities:
    v_prime: np.ndarray
    v_star_prime: np.ndarray
    cos_theta: float


def collide(v, v_star, sigma):
    """Vectorized sigma-representation.

    Returns ``(v_prime, v_star_prime, cos_theta)`` for arrays of shape (..., 3).
    """
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    center = 0.5 * (v + v_star)
    u = v - v_star
    un = np.linalg.norm(u, axis=-1)
    half = 0.5 * un[..., None] * sigma
    safe = np.where(un > 0, un, 1.0)
    cos_theta = np.where(un > 0, np.sum(u * sigma, axis=-1) / safe, 1.0)
    return center + half, center - half, np.clip(cos_theta, -1.0, 1.0)


def post_collision(pair: CollisionPair) -> PostCollisionVelocities:
    vp, vsp, c = collide(pair.v, pair.v_star, pair.sigma)
    if np.linalg.norm(pair.v - pair.v_star) == 0.0:
        # identity collision by convention
        vp, vsp = pair.v.copy(), pair.v_star.copy()
    return PostCollisionVelocities(v_prime=vp, v_star_prime=vsp, cos_theta=float(c))


def kernel_value(spec: CollisionKernelSpec, pair: CollisionPair) -> float:
    """B(v - v*, sigma) = |v - v*|^gamma b(cos theta)."""
    r = float(np.linalg.norm(pair.v - pair.v_star))
    if r == 0.0:
        if spec.gamma < 0:
            raise SingularRelativeVelocity("v = v* with gamma < 0")
        c = 1.0
        radial = 1.0 if spec.gamma == 0 else 0.0
    else:
        c = float(np.dot(pair.v - pair.v_star, pair.sigma) / r)
        radial = r ** spec.gamma
    return float(radial * spec.b(np.clip(c, -1.0, 1.0)))


def symmetrized_kernel(spec: CollisionKernelSpec) -> CollisionKernelSpec:
    """Replace b by (b(c) + b(-c)) 1_{c >= 0}."""
    if spec.support_restricted:
        raise AlreadySymmetrized("kernel is already supported on the hemisphere")
    prof = _SymmetrizedProfile(spec.angular_profile)
    # (b(c)+b(-c)) can reach 2/K, so the cutoff constant halves.
    return CollisionKernelSpec(gamma=spec.gamma, angular_profile=prof,
                               cutoff_lower=spec.cutoff_lower / 2.0,
                               support_restricted=True,
                               profile_tag=f"sym({spec.profile_tag})")


def plane_basis(n) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal basis of the plane orthogonal to ``n``.

    The coordinate axes other than the one carrying the largest component of
    ``n`` are orthogonalized against ``n`` (Gram-Schmidt) in index order.
    """
    n = np.asarray(n, dtype=float)
    nn = np.linalg.norm(n)
    if nn == 0.0:
        raise DegenerateDirection("zero normal vector")
    e = n / nn
    big = int(np.argmax(np.abs(e)))
    seed = np.eye(3)[[i for i in range(3) if i != big][0]]
    a = seed - np.dot(seed, e) * e
    a /= np.linalg.norm(a)
    b = np.cross(e, a)
    return a, b


def carleman_transform_point(v, v_prime, w, tol: float = 1e-10):
    """Map a Carleman point (v', w) with w orthogonal to v' - v to collision variables.

    Returns
    -------
    tuple
        ``(v_star, v_star_prime, r, cos_half_theta, jacobian_weight)`` where the
        weight 4 / (|v' - v| r) converts dw dv' into dsigma dv*.
    """
    v = np.asarray(v, dtype=float)
    v_prime = np.asarray(v_prime, dtype=float)
    w = np.asarray(w, dtype=float)
    d = v_prime - v
    rho = float(np.linalg.norm(d))
    if rho == 0.0:
        raise DegenerateDirection("v' = v")
    if abs(np.dot(w, d)) > tol * max(1.0, rho * np.linalg.norm(w)):
        raise ConfigurationError("w must be orthogonal to v' - v")
    wn = float(np.linalg.norm(w))
    r = float(np.hypot(rho, wn))
    return v_prime + w, v + w, r, wn / r, 4.0 / (rho * r)


def carleman_cos_theta(rho, t):
    """cos(theta) for the Carleman point with |v'-v| = rho and |w| = t."""
    rho = np.asarray(rho, dtype=float)
    t = np.asarray(t, dtype=float)
    return (t * t - rho * rho) / (t * t + rho * rho)
