"""Monte Carlo checks of the collision change-of-variable identities.

Each identity compares two integrals that must agree exactly.  When both
sides live on the same sample space they are evaluated on shared samples and
the z-score uses the paired difference; otherwise the sides get independent
streams and the standard errors are combined.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import UnknownIdentity
from ..grids import MonteCarloPlan, mean_and_error
from ..kernel_geometry import CollisionKernelSpec, collide

Z_LIMIT = 3.0
CARLEMAN_TEST_RADIUS = 2.0
_FIXED_V = np.array([0.3, -0.2, 0.5])


@dataclass(frozen=True)
class IdentityCheck:
    identity_id: str
    gamma: float
    lhs: float
    lhs_error: float
    rhs: float
    rhs_error: float
    z: float
    passed: bool
    paired: bool
    samples: int
    seed: int
    test_function: str

    def to_dict(self) -> dict:
        return asdict(self)


def _sphere(rng, n):
    d = rng.standard_normal((n, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _gauss_density(x, scale):
    return (np.exp(-0.5 * np.sum(x * x, axis=-1) / scale ** 2)
            / (2.0 * np.pi * scale ** 2) ** 1.5)


def _test_fn(name):
    if name == "one":
        return lambda x: np.ones(x.shape[:-1])
    if name == "maxwellian":
        return lambda x: np.exp(-0.5 * np.sum(x * x, axis=-1)) / (2.0 * np.pi) ** 1.5
    if name == "bump":
        # smooth, rapidly decaying and not radial
        return lambda x: np.exp(-np.sum((x - np.array([0.5, 0.0, -0.3])) ** 2, axis=-1)) * (1.0 + 0.5 * x[..., 0])
    raise UnknownIdentity(f"unknown test function {name!r}")


def _kernel(spec, u_norm, c, angular):
    with np.errstate(divide="ignore"):
        radial = np.where(u_norm > 0, u_norm, 1.0) ** spec.gamma
    return radial * angular(c)


def _regular(spec, plan, test):
    """v-integral of f(v') versus f(v) / cos^(3+gamma)(theta/2); v* fixed."""
    f = _test_fn(test)
    rng = plan.rng(11)
    n = plan.sample_count
    v = rng.standard_normal((n, 3)) * 2.0
    sig = _sphere(rng, n)
    iw = 4.0 * np.pi / _gauss_density(v, 2.0)
    vs = np.broadcast_to(_FIXED_V, v.shape)
    vp, _, c = collide(v, vs, sig)
    un = np.linalg.norm(v - vs, axis=1)
    B = _kernel(spec, un, c, spec.b)
    half = np.sqrt(0.5 * (1.0 + c))
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = B * f(vp) * iw
        rhs = np.where(B > 0, B / half ** (3.0 + spec.gamma), 0.0) * f(v) * iw
    return lhs, rhs


def _singular(spec, plan, test):
    """v*-integral of f(v') versus f(v*) / sin^(3+gamma)(theta/2); v fixed.

    The angular weight is 1_{cos theta <= 0}, which keeps sin(theta/2) away
    from zero; the identity holds for any angular weight.
    """
    f = _test_fn(test)
    rng = plan.rng(12)
    n = plan.sample_count
    vs = rng.standard_normal((n, 3)) * 2.0
    sig = _sphere(rng, n)
    iw = 4.0 * np.pi / _gauss_density(vs, 2.0)
    v = np.broadcast_to(_FIXED_V, vs.shape)
    vp, _, c = collide(v, vs, sig)
    un = np.linalg.norm(v - vs, axis=1)
    B = _kernel(spec, un, c, lambda cc: (cc <= 0.0).astype(float))
    half = np.sqrt(0.5 * (1.0 - c))
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = B * f(vp) * iw
        rhs = np.where(B > 0, B / half ** (3.0 + spec.gamma), 0.0) * f(vs) * iw
    return lhs, rhs


def _prepost(spec, plan, test):
    """F(v, v*, v', v*') versus F(v', v*', v, v*) under B dv dv* dsigma."""
    if test == "one":
        g1 = g2 = g3 = _test_fn("one")
    else:
        g1 = _test_fn("maxwellian")
        g2 = _test_fn("bump")
        g3 = lambda x: 1.0 / (1.0 + np.sum(x * x, axis=-1))  # noqa: E731
    rng = plan.rng(13)
    n = plan.sample_count
    v = rng.standard_normal((n, 3)) * 1.5
    vs = rng.standard_normal((n, 3)) * 1.5
    sig = _sphere(rng, n)
    iw = 4.0 * np.pi / (_gauss_density(v, 1.5) * _gauss_density(vs, 1.5))
    vp, vsp, c = collide(v, vs, sig)
    B = _kernel(spec, np.linalg.norm(v - vs, axis=1), c, spec.b)
    if test == "one":
        w = B * iw
        return w, w
    lhs = B * g1(v) * g2(vs) * g3(vp) * iw
    rhs = B * g1(vp) * g2(vsp) * g3(v) * iw
    return lhs, rhs


def _carleman(spec, plan, test):
    """sigma-v* integral versus the v'-plane form; independent samples."""
    R = CARLEMAN_TEST_RADIUS
    v = _FIXED_V
    n = plan.sample_count
    # left: v* uniform in the ball |v*| <= R (the test weight vanishes outside)
    rng = plan.rng(14)
    d = _sphere(rng, n)
    vs = d * (R * rng.random(n) ** (1.0 / 3.0))[:, None]
    sig = _sphere(rng, n)
    vol = 4.0 / 3.0 * np.pi * R ** 3
    vb = np.broadcast_to(v, vs.shape)
    _, _, c = collide(vb, vs, sig)
    lhs = _kernel(spec, np.linalg.norm(vb - vs, axis=1), c, spec.b) * vol * 4.0 * np.pi
    # right: |v' - v| and |w| exponential, directions uniform; the polar
    # densities cancel the 1/(|v' - v| r) singularity of the measure factor
    rng = plan.rng(15)
    scale = 1.5
    rho = rng.exponential(scale, n)
    nrm = _sphere(rng, n)
    t = rng.exponential(scale, n)
    phi = 2.0 * np.pi * rng.random(n)
    seed = np.where(np.abs(nrm[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    e1 = seed - np.sum(seed * nrm, axis=1, keepdims=True) * nrm
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(nrm, e1)
    w = t[:, None] * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    vstar = v + rho[:, None] * nrm + w
    r = np.hypot(rho, t)
    cos_theta = (t * t - rho * rho) / (r * r)
    p_rho = np.exp(-rho / scale) / scale
    p_t = np.exp(-t / scale) / scale
    inside = (np.linalg.norm(vstar, axis=1) <= R).astype(float)
    F = r ** spec.gamma * spec.b(cos_theta) * inside
    # dv' = rho^2 d rho d omega, dw = t dt d phi
    rhs = F * 4.0 / (rho * r) * (4.0 * np.pi * rho * rho / p_rho) * (2.0 * np.pi * t / p_t)
    return lhs, rhs


IDENTITIES = {
    "carleman": (_carleman, False, "ball"),
    "prepost": (_prepost, True, "product"),
    "regular-cov": (_regular, True, "maxwellian"),
    "singular-cov": (_singular, True, "bump"),
}


def run_identity(identity_id: str, plan: MonteCarloPlan, spec: CollisionKernelSpec | None = None,
                 test: str | None = None) -> IdentityCheck:
    """Estimate both sides of a registered identity and their z-score.

    ``test`` selects the test function; ``"one"`` is accepted by every
    identity except ``carleman``, whose test weight is fixed.
    """
    if identity_id not in IDENTITIES:
        raise UnknownIdentity(f"unknown identity {identity_id!r}")
    spec = spec or CollisionKernelSpec.named(0.0)
    fn, paired, default_test = IDENTITIES[identity_id]
    test = test or default_test
    lhs_s, rhs_s = fn(spec, plan, test)
    L, eL = mean_and_error(lhs_s)
    R, eR = mean_and_error(rhs_s)
    if paired:
        diff = lhs_s - rhs_s
        if not np.any(diff):
            z = 0.0
        else:
            m, e = mean_and_error(diff)
            z = m / e if e > 0 else (0.0 if m == 0 else np.inf)
    else:
        e = float(np.hypot(eL, eR))
        z = (L - R) / e if e > 0 else (0.0 if L == R else np.inf)
    return IdentityCheck(identity_id=identity_id, gamma=float(spec.gamma), lhs=L, lhs_error=eL,
                         rhs=R, rhs_error=eR, z=float(z), passed=bool(abs(z) <= Z_LIMIT),
                         paired=paired, samples=int(plan.sample_count), seed=int(plan.seed),
                         test_function=test)
