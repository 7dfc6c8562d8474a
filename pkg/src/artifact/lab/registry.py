"""Registry of quantitative bounds.

Each entry is data: an evaluator name, a sweep of parameter sets, the
symbolic envelope, and the claims checked on the fitted constants.  The
evaluators return samples of the left-hand side together with the envelope
basis evaluated at the same probe points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from ..collision import (
    AnalyticField,
    QuadratureSettings,
    gamma_k_terms,
    nu,
    nu_radial,
)
from ..errors import PreconditionViolated
from ..kernel_geometry import CollisionKernelSpec, collide
from ..quadrature import gauss_interval
from . import integrals as I


# ---------------------------------------------------------------------------
# resolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Resolution:
    """Probe and quadrature sizes; ``level`` 1 is the smoke tier."""

    level: int = 1

    @property
    def n_radii(self) -> int:
        return 10 * self.level

    @property
    def n_seg(self) -> int:
        return min(4 * self.level, 12)

    @property
    def n_phi(self) -> int:
        return 8 + 8 * self.level

    @property
    def n_configs(self) -> int:
        return 256 * self.level

    @property
    def n_times(self) -> int:
        return 24 * self.level

    @property
    def n_family(self) -> int:
        return 6 * self.level

    def radii(self, r_max: float = 64.0) -> np.ndarray:
        return np.concatenate([[0.0], np.geomspace(0.25, r_max, self.n_radii - 1)])

    def collision_settings(self) -> QuadratureSettings:
        if self.level <= 1:
            return QuadratureSettings(n_u=16, n_dir_theta=6, n_dir_phi=12, n_c=4, n_psi=8)
        if self.level == 2:
            return QuadratureSettings()
        return QuadratureSettings(n_u=32, n_dir_theta=10, n_dir_phi=20, n_c=8, n_psi=16)


TIER_LEVELS = {"smoke": 1, "standard": 2, "deep": 3}


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Claim:
    """A checkable statement about fitted constants or sample extras.

    kinds
      power        fitted constant ``target`` ~ parameter^exponent
      tail         extras['tail_exponent'] matches extras['predicted_exponent']
      decreasing   fitted constant strictly decreasing along the sweep order
      oracle       extras['estimate'] within ``tolerance`` (relative) of extras['oracle']
      at_most      fitted constant ``target`` <= ``bound``
      below        lhs < rhs at every probe (strict sign statement)
    """

    kind: str
    parameter: str | None = None
    exponent: float | None = None
    target: int = 0
    tolerance: float = 0.25
    bound: float | None = None
    note: str = ""


@dataclass(frozen=True)
class BoundRegistryEntry:
    id: str
    title: str
    anchor: str
    rhs_form: str
    probe: str
    evaluator: Callable
    sweep: tuple
    claims: tuple = ()
    free: int | None = None
    tail_fit: float | Callable | None = None
    precondition: Callable | None = None
    extra: dict = field(default_factory=dict)

    def tail_radius(self, params: dict) -> float | None:
        if callable(self.tail_fit):
            return float(self.tail_fit(params))
        return self.tail_fit

    def check(self, params: dict):
        if self.precondition is not None:
            self.precondition(params)


@dataclass
class Sample:
    """LHS samples for one sweep point."""

    probes: np.ndarray
    lhs: np.ndarray
    basis: np.ndarray | None
    extras: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# preconditions
# ---------------------------------------------------------------------------

def _need_k(params):
    g, k = params.get("gamma", 0.0), params["k"]
    if not k > max(3.0, 3.0 + g):
        raise PreconditionViolated(f"k = {k} must exceed max(3, 3 + gamma) = {max(3.0, 3.0 + g)}")


def _need_gamma(lo, hi, closed_hi=False):
    def check(params):
        g = params["gamma"]
        ok = lo < g and (g <= hi if closed_hi else g < hi)
        if not ok:
            raise PreconditionViolated(f"gamma = {g} outside ({lo}, {hi}{']' if closed_hi else ')'}")
    return check


def _all(*checks):
    def check(params):
        for c in checks:
            c(params)
    return check


def _hls_check(params):
    ranges = {"L2": (-1.5, 0.0), "L3": (-2.0, 0.0), "Linf": (-3.0, 0.0)}
    lo, hi = ranges[params["variant"]]
    if not (lo < params["gamma"] < hi):
        raise PreconditionViolated(f"variant {params['variant']} needs gamma in ({lo}, {hi})")


def _exp_weight_check(params):
    if not (params["a"] > 0 and 0 < params["b"] < 2):
        raise PreconditionViolated("need a > 0 and 0 < b < 2")


def _rates_check(params):
    if not params["l2"] > params["l1"] > 0:
        raise PreconditionViolated("need l2 > l1 > 0")


def _r_check(params):
    if not 0 < params["r"] < 1:
        raise PreconditionViolated("need 0 < r < 1")


def _beta_check(params):
    if not 0 < params["p"] <= 2:
        raise PreconditionViolated("need 0 < p <= 2")


def _coercive_check(params):
    if params["profile"] not in ("one", "linear", "square"):
        raise PreconditionViolated(f"unknown profile {params['profile']!r}")


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _family(res: Resolution):
    """Radial test functions: Gaussians over a temperature range and power laws."""
    temps = np.geomspace(0.1, 10.0, res.n_family)
    fam = [I.gaussian(T) for T in temps]
    fam += [I.bracket_power(m) for m in (5.0, 8.0)]
    return fam


def _stable_key(*parts) -> list[int]:
    import zlib
    return [zlib.crc32(repr(p).encode()) for p in parts]


def _configs(res: Resolution, seed: int, tag: str):
    """Random collision configurations with log-uniform speeds in [1e-2, 64]."""
    rng = np.random.default_rng([int(seed)] + _stable_key(tag))
    n = res.n_configs
    def sph(m):
        d = rng.standard_normal((m, 3))
        return d / np.linalg.norm(d, axis=1, keepdims=True)
    sv = np.exp(rng.uniform(np.log(1e-2), np.log(64.0), n))
    ss = np.exp(rng.uniform(np.log(1e-2), np.log(64.0), n))
    v = sph(n) * sv[:, None]
    vs = sph(n) * ss[:, None]
    sig = sph(n)
    return v, vs, sig


def _tail_sqrt_k(params):
    """The weight ratio peaks near |v| ~ sqrt(k); the plateau starts a few multiples later."""
    return 4.0 * np.sqrt(params["k"])


def _tail_slope(r, lhs, gamma_base=0.0, frac=1.0 / 3.0):
    """Slope of log lhs against log <v> on the outer third of the radii."""
    r = np.asarray(r)
    m = max(3, int(np.ceil(frac * len(r))))
    x = np.log(I.bracket_r(r[-m:]))
    y = np.log(lhs[-m:])
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# evaluators
# ---------------------------------------------------------------------------

def eval_hls(params, res, seed):
    g, variant = params["gamma"], params["variant"]
    fam = _family(res)
    lhs, rhs = [], []
    for F in fam:
        # sup over v of a radially decreasing profile's potential sits at v = 0
        lhs.append(max(I.potential(F, r, g, n_seg=2 * res.n_seg) for r in (0.0, 0.5, 1.0)))
        n1 = F.lp_norm(1.0)
        if variant == "L2":
            rhs.append(n1 ** (1 + 2 * g / 3) * F.lp_norm(2.0) ** (-2 * g / 3))
        elif variant == "L3":
            rhs.append(n1 ** (1 + g / 2) * F.lp_norm(3.0) ** (-g / 2))
        else:
            rhs.append(n1 ** (1 + g / 3) * F.lp_norm(np.inf) ** (-g / 3))
    return Sample(np.arange(len(fam), dtype=float), np.array(lhs), np.array(rhs)[:, None],
                  {"family": [F.label for F in fam]})


def _sobolev_sq(F: I.RadialProfile, m: int, l: float, n: int = 64) -> float:
    r, w = I.radial_rule(F.reach, n)
    wt = 4.0 * np.pi * w * r * r * I.bracket_r(r) ** (2 * l)
    val = np.dot(wt, F.value(r) ** 2)
    if m >= 1:
        val += np.dot(wt, F.derivative(r) ** 2)
    return float(val)


def _square(F: I.RadialProfile) -> I.RadialProfile:
    """|F|^2 for the Gaussian and power-law families."""
    if F.label.startswith("gauss"):
        T = float(F.label.split("T=")[1].split(",")[0])
        return I.gaussian(T / 2.0)
    m = float(F.label.split("^-")[1])
    return I.bracket_power(2 * m)


def eval_double_sobolev(params, res, seed):
    g = params["gamma"]
    fam = _family(res)
    pairs = [(a, b) for a in range(len(fam)) for b in range(len(fam)) if (a + b) % 2 == 0]
    lhs, rhs = [], []
    for a, b in pairs:
        f, h = fam[a], fam[b]
        lhs.append(I.double_potential(_square(f), _square(h), g, n=8 * res.n_seg))
        opts = []
        for m, n in ((0, 1), (1, 0)):
            opts.append(_sobolev_sq(f, m, g / 2) * _sobolev_sq(h, n, 2.0))
            opts.append(_sobolev_sq(f, m, 2.0) * _sobolev_sq(h, n, g / 2))
        rhs.append(min(opts))
    return Sample(np.arange(len(pairs), dtype=float), np.array(lhs), np.array(rhs)[:, None],
                  {"pairs": [f"{fam[a].label}|{fam[b].label}" for a, b in pairs]})


def eval_post_expansion(params, res, seed):
    k = params["k"]
    v, vs, sig = _configs(res, seed, "post-expansion")
    vp, _, c = collide(v, vs, sig)
    s2 = 0.5 * (1.0 - c)
    bv, bs, bp = (I.bracket_r(np.linalg.norm(x, axis=1)) for x in (v, vs, vp))
    lhs = np.abs(bp ** k - s2 ** (k / 2) * bs ** k)
    basis = np.column_stack([s2 * bs ** (k - 1) * bv, bv ** k])
    order = np.argsort(np.linalg.norm(v, axis=1), kind="stable")
    return Sample(np.linalg.norm(v, axis=1)[order], lhs[order], basis[order])


def eval_weighted_pairing(params, res, seed):
    g = params["gamma"]
    l = max(g + 2.0, 1.5)
    fam = _family(res)
    pairs = [(a, b) for a in range(len(fam)) for b in range(len(fam)) if (a + 2 * b) % 3 == 0]
    lhs, rhs = [], []
    for a, b in pairs:
        lhs.append(I.double_potential(fam[a], fam[b], g, n=8 * res.n_seg))
        rhs.append(fam[a].lp_norm(2.0, l) * fam[b].lp_norm(2.0, l))
    return Sample(np.arange(len(pairs), dtype=float), np.array(lhs), np.array(rhs)[:, None],
                  {"l": l})


def eval_potential_bracket(params, res, seed):
    g, k = params["gamma"], params["k"]
    r = res.radii()
    F = I.bracket_power(k)
    lhs = np.array([I.potential(F, ri, g, n_seg=2 * res.n_seg) for ri in r])
    b = I.bracket_r(r)
    return Sample(r, lhs, np.column_stack([b ** g, b ** (g - 2)]))


def eval_double_bracket(params, res, seed):
    g, k = params["gamma"], params["k"]
    r = res.radii()
    lhs = []
    for ri in r:
        br = I.bracket_r(ri)
        lhs.append(I.carleman_gain(g, ri, lambda x: (br / I.bracket_r(x)) ** k,
                                   lambda q: (1.0 + q) ** (-0.5 * k), n_seg=res.n_seg,
                                   n_phi=res.n_phi, axis_grading=True))
    b = I.bracket_r(r)
    basis = np.column_stack([b ** g, b ** (g - 2)]) if 0 <= g <= 1 else (b ** g)[:, None]
    return Sample(r, np.array(lhs), basis)


def eval_exp_gain(params, res, seed):
    g, a, bexp = params["gamma"], params["a"], params["b"]
    r = res.radii()
    lhs = []
    for ri in r:
        w0 = I.bracket_r(ri) ** bexp
        lhs.append(I.carleman_gain(g, ri, lambda x: np.exp(a * (w0 - I.bracket_r(x) ** bexp)),
                                   n_seg=res.n_seg))
    lhs = np.array(lhs)
    pred = g - bexp * (g + 3.0) / 4.0
    return Sample(r, lhs, (I.bracket_r(r) ** pred)[:, None],
                  {"tail_exponent": _tail_slope(r, lhs), "predicted_exponent": pred})


def eval_scalar_f(params, res, seed):
    k, a, b, part = params["k"], params["a"], params["b"], params["part"]

    def f(x):
        return a * (1.0 + x) ** (b / 2.0) - 0.5 * k * np.log1p(x)

    grid = np.concatenate([[0.0], np.geomspace(1e-3, 1e8, 40 * res.level)])
    if part == "monotone":
        # max over c <= d of f(c) - f(d), per d
        fx = f(grid)
        run = np.maximum.accumulate(fx)
        lhs = run - fx
        probes = grid
    else:
        C, D = np.meshgrid(grid, grid, indexing="ij")
        lhs = np.max(f(C + D) - f(C) - f(D), axis=1)
        probes = grid
    return Sample(probes, lhs, np.ones((len(lhs), 1)))


def eval_exp_ratio(params, res, seed):
    k, a, b = params["k"], params["a"], params["b"]
    v, vs, sig = _configs(res, seed, "exp-ratio")
    vp, vsp, _ = collide(v, vs, sig)
    bv, bp, bsp = (I.bracket_r(np.linalg.norm(x, axis=1)) for x in (v, vp, vsp))
    lhs = np.exp(a * (bv ** b - bp ** b - bsp ** b))
    basis = (bv ** k / (bp ** k * bsp ** k))[:, None]
    order = np.argsort(np.linalg.norm(v, axis=1), kind="stable")
    return Sample(np.linalg.norm(v, axis=1)[order], lhs[order], basis[order])


def eval_beta(params, res, seed):
    from scipy import special
    p = params["p"]
    q = np.geomspace(1.0, 1e4, res.n_times)
    lhs = special.beta(p, q)
    tail = q >= 10.0
    slope = float(np.polyfit(np.log(q[tail]), np.log(lhs[tail]), 1)[0])
    return Sample(q, lhs, (q ** -p)[:, None], {"tail_exponent": slope, "predicted_exponent": -p})


def eval_loss_window(params, res, seed):
    g, k, eps = params["gamma"], params["k"], params["eps"]
    r = res.radii()
    F = I.bracket_power(k)
    lhs = []
    for ri in r:
        br = float(I.bracket_r(ri))
        inner = I.potential(F, ri, g, n_seg=2 * res.n_seg, window=(0.0, eps * br))
        outer = I.potential(F, ri, g, n_seg=2 * res.n_seg, window=(br / eps, np.inf))
        lhs.append(inner + outer)
    return Sample(r, np.array(lhs), (I.bracket_r(r) ** g)[:, None])


def eval_maxwell_gain(params, res, seed):
    g, k = params["gamma"], params["k"]
    r = res.radii()
    lhs = np.array([I.carleman_gain(g, ri, lambda x, br=I.bracket_r(ri): (br / I.bracket_r(x)) ** k,
                                    n_seg=max(8, res.n_seg)) for ri in r])
    b = I.bracket_r(r)
    return Sample(r, lhs, np.column_stack([b ** g, b ** (g - 2)]),
                  {"normalized_constant_power": (g + 3.0) / 4.0})


EPS_SWEEP = (0.2, 0.1, 0.05, 0.025)


@lru_cache(maxsize=256)
def _kernel_mass(gamma, k, r, n_seg):
    spec = CollisionKernelSpec.named(gamma)
    br = float(I.bracket_r(r))
    edges = [e * br for e in EPS_SWEEP] + [br / e for e in EPS_SWEEP]
    return I.kernel_mass_profile(spec, k, r, n_seg=n_seg, extra_breaks=edges,
                                 rho_max=r + max(400.0, 1.01 * br / min(EPS_SWEEP)))


def eval_kernel_mass(params, res, seed):
    g, k, part = params["gamma"], params["k"], params["part"]
    r = res.radii()
    lhs = []
    for ri in r:
        rho, m0, m2 = _kernel_mass(float(g), float(k), float(ri), res.n_seg)
        if part == "mass":
            lhs.append(m0.sum())
        elif part == "weighted":
            lhs.append(m2.sum())
        else:
            br = I.bracket_r(ri)
            eps = params["eps"]
            out = (rho <= eps * br) | (rho >= br / eps)
            lhs.append(m0[out].sum())
    b = I.bracket_r(r)
    basis = {"mass": np.column_stack([b ** g, b ** (g - 2)]),
             "weighted": (b ** (g - 2))[:, None],
             "annulus": (b ** g)[:, None]}[part]
    return Sample(r, np.array(lhs), basis)


P_CANDIDATES = (1.05, 1.1, 1.2)


def feasible_p(gamma: float, candidates=P_CANDIDATES) -> dict:
    """Which p satisfy the five constraints used for the Gamma_k pointwise bounds.

    -3 < p gamma < 3/2, 4(p-1)/(p+1) <= 1, (p-1)/(2p) <= 1/2 + gamma/6, and
    some eps in (0, (p-1)/(2p)] with -3 < (p + eps) gamma <= -2.
    """
    out = {}
    for p in candidates:
        c1 = -3.0 < p * gamma < 1.5
        c2 = 4.0 * (p - 1.0) / (p + 1.0) <= 1.0
        c3 = (p - 1.0) / (2.0 * p) <= 0.5 + gamma / 6.0
        eps_hi = (p - 1.0) / (2.0 * p)
        c4 = False
        eps_range = None
        if gamma < 0:
            lo = max(0.0, -2.0 / gamma - p)
            hi = min(eps_hi, -3.0 / gamma - p)
            if hi > 0 and lo <= hi and hi > lo - 1e-15 and (lo < hi or lo > 0):
                eps_pick = max(lo, 1e-12)
                if eps_pick <= hi and -3.0 < (p + eps_pick) * gamma <= -2.0:
                    c4, eps_range = True, [lo, hi]
        out[str(p)] = {"feasible": bool(c1 and c2 and c3 and c4),
                       "constraints": [bool(c1), bool(c2), bool(c3), bool(c4), bool(c4)],
                       "eps_range": eps_range}
    return out


def _smallest_feasible_p(gamma):
    table = feasible_p(gamma)
    for p in P_CANDIDATES:
        if table[str(p)]["feasible"]:
            return p
    return None


def eval_gamma_pointwise(params, res, seed):
    g, k, alpha, part = params["gamma"], params["k"], params["alpha"], params["part"]
    p = _smallest_feasible_p(g)
    if p is None:
        raise PreconditionViolated(f"no admissible p for gamma = {g}")
    spec = CollisionKernelSpec.named(g)
    r = np.concatenate([[0.0], np.geomspace(0.25, 8.0, 3 + 2 * res.level)])
    pts = r[:, None] * np.array([[1.0, 0.0, 0.0]])
    settings = res.collision_settings()
    fam = [I.gaussian(0.5), I.gaussian(1.0), I.gaussian(2.0), I.bracket_power(8.0)][: 2 + res.level]
    nu_v = nu(spec, pts)
    probes, lhs, basis, labels = [], [], [], []
    for F in fam:
        f = AnalyticField(lambda x, F=F: F.value(np.linalg.norm(x, axis=-1)), support_radius=F.reach + 4.0)
        plus, minus = gamma_k_terms(spec, k, f, f, pts, settings)
        term = plus if part == "plus" else minus
        val = np.abs(I.bracket_r(r) ** alpha * term)
        sup_a = F.lp_norm(np.inf, alpha)
        sup_0 = F.lp_norm(np.inf, 1.0 if part == "plus" else 0.0)
        l1 = F.lp_norm(1.0)
        env = nu_v * sup_a * sup_0 ** ((p + 1) / (2 * p)) * l1 ** ((p - 1) / (2 * p))
        probes.append(r)
        lhs.append(val)
        basis.append(env)
        labels += [F.label] * len(r)
    return Sample(np.concatenate(probes), np.concatenate(lhs), np.concatenate(basis)[:, None],
                  {"p": p, "family": labels})


def eval_semigroup(params, res, seed):
    l1, l2 = params["l1"], params["l2"]
    t = np.concatenate([[0.0], np.geomspace(1e-2, 64.0, res.n_times - 1)])
    lhs = I.semigroup_convolution(l1, l2, t)
    return Sample(t, lhs, (np.exp(-l1 * t) / (l2 - l1))[:, None])


def eval_power_exp(params, res, seed):
    part = params["part"]
    k = params["k"]
    if part == "scalar":
        b = params.get("b", 20.0)
        a = np.unique(np.concatenate([[0.5, 1.0, 2.0, 4.0], np.geomspace(0.05, 64.0, res.n_times)]))
        sup = np.array([I.sup_power_exp(k, ai, b)[0] for ai in a])
        oracle = np.where(k / a <= b, (k / a) ** k * np.exp(-k), b ** k * np.exp(-a * b))
        return Sample(a, sup, ((1.0 + a) ** -k)[:, None],
                      {"estimate": sup.tolist(), "oracle": oracle.tolist()})
    g = params["gamma"]
    spec = CollisionKernelSpec.named(g)
    s = np.concatenate([[0.0], np.geomspace(0.05, 400.0, 40 * res.level)])
    nus = nu_radial(spec, s)
    t = np.concatenate([[0.0], np.geomspace(1e-2, 1e3, res.n_times - 1)])
    lhs = np.array([np.max(np.exp(-nus * ti) * nus ** k) for ti in t])
    return Sample(t, lhs, ((1.0 + t) ** -k)[:, None])


def eval_damped_average(params, res, seed):
    g, rr = params["gamma"], params["r"]
    spec = CollisionKernelSpec.named(g)
    s = np.concatenate([[0.0], np.geomspace(0.05, 400.0, 12 * res.level)])
    nus = nu_radial(spec, s)
    t = np.concatenate([[0.0], np.geomspace(1e-2, 1e3, res.n_times - 1)])
    lhs = np.max(np.array([I.damped_average(n_, rr, t, n=16 * res.level) for n_ in nus]), axis=0)
    return Sample(t, lhs, ((1.0 + t) ** -rr)[:, None])


def eval_gamma_l2(params, res, seed):
    g, k, l = params["gamma"], params["k"], params["l"]
    spec = CollisionKernelSpec.named(g)
    settings = res.collision_settings()
    fam = [I.gaussian(0.5), I.gaussian(1.0), I.gaussian(2.0), I.bracket_power(8.0)][: 2 + res.level]
    rq, wq = gauss_interval(6 * res.level + 4, 0.0, 12.0)
    pts = rq[:, None] * np.array([[1.0, 0.0, 0.0]])
    lhs, rhs = [], []
    for F in fam:
        f = AnalyticField(lambda x, F=F: F.value(np.linalg.norm(x, axis=-1)), support_radius=F.reach + 4.0)
        plus, minus = gamma_k_terms(spec, k, f, f, pts, settings)
        G = (plus - minus) * I.bracket_r(rq) ** l
        lhs.append(float(np.sqrt(4.0 * np.pi * np.dot(wq, rq * rq * G * G))))
        rhs.append(F.lp_norm(2.0) * F.lp_norm(2.0, l) ** (1 + g / 3) * F.lp_norm(np.inf, l) ** (-g / 3))
    return Sample(np.arange(len(fam), dtype=float), np.array(lhs), np.array(rhs)[:, None],
                  {"family": [F.label for F in fam]})


def eval_coercivity(params, res, seed):
    spec = CollisionKernelSpec.named(0.0, params["profile"], cutoff_lower=0.5)
    ks = np.array([4.25, 4.5, 5.0, 6.0, 8.0, 12.0, 16.0, 32.0, 64.0])
    c, w = gauss_interval(32 * res.level, *spec.c_interval)
    sh = np.sqrt(0.5 * (1.0 - c))
    bw = 2.0 * np.pi * w * spec.b(c)
    rhs_val = float(np.dot(bw, sh ** 2))
    lhs = np.array([np.dot(bw, sh ** (kk - 2.0)) for kk in ks])
    margin = rhs_val - lhs
    return Sample(ks, lhs, np.full((len(ks), 1), rhs_val), {"margin": margin.tolist()})


# ---------------------------------------------------------------------------
# the registry
# ---------------------------------------------------------------------------

def _grid(**axes):
    keys = list(axes)
    out = [{}]
    for key in keys:
        out = [dict(d, **{key: v}) for d in out for v in axes[key]]
    return tuple(out)


def _entries():
    E = BoundRegistryEntry
    k_sweep = (8.0, 16.0, 32.0, 64.0)
    return [
        E("Beta", "Beta function decay in the second argument",
          "B(p, q) ~ q^(-p), 0 < p <= 2", "C q^(-p)", "scalar", eval_beta,
          _grid(p=(0.5, 1.0, 1.5, 2.0)),
          (Claim("tail", "q", note="log-log slope on q >= 10 equals -p"),),
          precondition=_beta_check),
        E("Coercivity", "sign of the combined angular coefficient for k > 4",
          "sin^2(theta/2) (1 - sin^(k-4)(theta/2)) > 0", "||b sin^2(theta/2)||", "scalar",
          eval_coercivity, _grid(profile=("one", "linear", "square")),
          (Claim("below", note="||b sin^(k-2)|| < ||b sin^2|| for every k > 4"),),
          precondition=_coercive_check),
        E("L2.11", "double bracket gain ratio",
          "<v>^k / (<v'>^k <v*'>^k) integrated is <= C_k <v>^gamma",
          "c1 <v>^g + c2 <v>^(g-2) (g in [0,1]); C <v>^g otherwise", "velocity",
          eval_double_bracket, _grid(gamma=(-1.0, 0.0, 1.0), k=(8.0, 16.0)), free=1, tail_fit=_tail_sqrt_k,
          precondition=_all(_need_gamma(-3.0, 2.0, True), _need_k)),
        E("L2.12", "exponential weight gain ratio",
          "<= C_{a,b} <v>^(gamma - b(gamma+3)/4)", "C <v>^(g - b(g+3)/4)", "velocity",
          eval_exp_gain, _grid(gamma=(0.0,), a=(1.0,), b=(0.5, 1.0, 1.5)),
          (Claim("tail", "b", note="outer log-log slope equals gamma - b(gamma+3)/4"),),
          precondition=_all(_need_gamma(-3.0, 1.0, True), _exp_weight_check)),
        E("L2.15", "the scalar function a(1+x)^(b/2) - (k/2) ln(1+x)",
          "f(c) <= f(d) + C, f(c + d) <= f(c) + f(d) + C", "C", "scalar", eval_scalar_f,
          _grid(part=("monotone", "subadditive"), k=(2.0, 8.0), a=(0.5, 1.0), b=(0.5, 1.5)),
          precondition=_exp_weight_check),
        E("L2.16", "exponential versus polynomial collision weights",
          "e^(a<v>^b) / (e^(a<v'>^b) e^(a<v*'>^b)) <= C <v>^k / (<v'>^k <v*'>^k)",
          "C <v>^k / (<v'>^k <v*'>^k)", "config", eval_exp_ratio,
          _grid(k=(2.0, 8.0), a=(0.5, 1.0), b=(0.5, 1.5)), precondition=_exp_weight_check),
        E("L2.5", "weak Hardy-Littlewood-Sobolev bounds",
          "sup_v int |v - v*|^gamma |f| <= C ||f||_1^(1+2g/3) ||f||_2^(-2g/3) (and L3, Linf forms)",
          "C ||f||_1^(1-s) ||f||_p^s", "family", eval_hls,
          tuple(d for d in _grid(variant=("L2", "L3", "Linf"), gamma=(-0.5, -1.0, -1.4, -1.9, -2.5))
                if {"L2": -1.5, "L3": -2.0, "Linf": -3.0}[d["variant"]] < d["gamma"]),
          precondition=_hls_check),
        E("L2.6", "double integral against Sobolev products",
          "int int |v - v*|^gamma |f(v*)|^2 |g(v)|^2 <= C min over m+n=1 of weighted H^m H^n products",
          "C min_{m+n=1}(...)", "family", eval_double_sobolev, _grid(gamma=(-0.5, -1.0, -1.5)),
          precondition=_need_gamma(-2.0, 0.0)),
        E("L2.7", "expansion of <v'>^k",
          "<v'>^k = sin^k(theta/2) <v*>^k + R1 + R2", "c1 sin^2 <v*>^(k-1) <v> + c2 <v>^k", "config",
          eval_post_expansion, _grid(k=(4.0, 8.0, 16.0)),
          precondition=lambda p: None if p["k"] >= 4 else (_ for _ in ()).throw(
              PreconditionViolated("need k >= 4"))),
        E("L2.8", "pairing bound with l = max(gamma + 2, 3/2)",
          "int int |v - v*|^gamma g* f <= C ||g||_{L2_l} ||f||_{L2_l}", "C ||g||_{L2_l} ||f||_{L2_l}",
          "family", eval_weighted_pairing, _grid(gamma=(-2.0, -1.0, 0.0, 1.0)),
          precondition=_need_gamma(-3.0, 1.0, True)),
        E("L2.9", "potential of a polynomial weight",
          "int |v - v*|^gamma <v*>^(-k) <= (c/k) <v>^gamma + C_k <v>^(gamma-2)",
          "c1 <v>^g + c2 <v>^(g-2)", "velocity", eval_potential_bracket,
          _grid(gamma=(0.0,), k=k_sweep),
          (Claim("power", "k", exponent=-1.0, note="leading constant ~ 1/k"),),
          free=1, tail_fit=_tail_sqrt_k,
          precondition=_need_k),
        E("L6.1", "loss integral away from the annulus",
          "int over |v-v*| > <v>/eps or < eps <v> of |v-v*|^gamma <v*>^(-k) <= C_{k,eps} <v>^gamma",
          "C_{k,eps} <v>^g", "velocity", eval_loss_window,
          _grid(gamma=(-1.0, 0.0), k=(20.0,), eps=EPS_SWEEP),
          (Claim("decreasing", "eps", note="C_{k,eps} strictly decreasing as eps shrinks"),),
          precondition=_need_k),
        E("L6.2", "Maxwellian gain ratio",
          "int int |v-v*|^gamma <v>^k/<v'>^k e^(-|v*'|^2/2) <= c k^(-(gamma+3)/4) <v>^gamma + C_k <v>^(gamma-2)",
          "c1 <v>^g + c2 <v>^(g-2)", "velocity", eval_maxwell_gain,
          _grid(gamma=(0.0,), k=k_sweep),
          (Claim("power", "k", exponent=-0.75, note="leading constant ~ k^(-(gamma+3)/4)"),),
          free=1, tail_fit=_tail_sqrt_k,
          precondition=_need_k),
        E("L6.3", "mass of the kernel l_k",
          "int |l_k(v, v')| dv' <= c k^(-(gamma+3)/4) <v>^gamma + C_k <v>^(gamma-2)",
          "mass: c1 <v>^g + c2 <v>^(g-2); weighted: C <v>^(g-2); annulus: C_{k,eps} <v>^g",
          "velocity", eval_kernel_mass,
          tuple([dict(gamma=g, k=20.0, part="mass") for g in (-1.0, 0.0)]
                + [dict(gamma=g, k=20.0, part="weighted") for g in (-1.0, 0.0)]
                + [dict(gamma=g, k=20.0, part="annulus", eps=e) for g in (-1.0, 0.0) for e in EPS_SWEEP]),
          (Claim("decreasing", "eps", note="annulus-excluded C_{k,eps} strictly decreasing"),),
          free=1, tail_fit=_tail_sqrt_k,
          precondition=_need_k),
        E("L6.5", "pointwise bounds for Gamma_k^(+/-)",
          "|<v>^alpha Gamma_k^-(f,f)| <= C nu(v) ||<v>^alpha f||_inf ||f||_inf^((p+1)/2p) ||f||_1^((p-1)/2p)",
          "C nu(v) ||<v>^alpha f||_inf ||<v>^j f||_inf^((p+1)/2p) ||f||_1^((p-1)/2p)", "velocity",
          eval_gamma_pointwise, _grid(gamma=(-2.0,), k=(4.0,), alpha=(0.0, 2.0), part=("minus", "plus")),
          precondition=_need_k, extra={"p_table_gammas": (-2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0)}),
        E("L7.1", "convolution of two exponentials",
          "int_0^t e^(-l1(t-s)) e^(-l2 s) ds <= e^(-l1 t)/(l2 - l1)", "C e^(-l1 t)/(l2 - l1)", "time",
          eval_semigroup,
          tuple(dict(l1=a, l2=b) for a, b in ((0.5, 1.0), (1.0, 2.0), (1.0, 1.1), (0.1, 5.0))),
          (Claim("at_most", bound=1.0, note="the constant is 1"),), precondition=_rates_check),
        E("L7.4", "sup of x^k e^(-a x)",
          "sup_{0<x<=b} x^k e^(-ax) <= C_{b,k} (1+a)^(-k)", "C (1+a)^(-k) (scalar); C (1+t)^(-k) (frequency)",
          "scalar", eval_power_exp,
          tuple([dict(part="scalar", k=k, b=20.0) for k in (1.0, 2.0, 5.0)]
                + [dict(part="frequency", gamma=-1.0, k=k) for k in (1.0, 2.0)]),
          (Claim("oracle", tolerance=1e-3, note="scan sup equals (k/a)^k e^(-k) or b^k e^(-ab)"),)),
        E("L7.5", "damped average of an algebraic decay",
          "int_0^t e^(-nu(t-s)) nu (1+s)^(-r) ds <= C_r (1+t)^(-r)", "C_r (1+t)^(-r)", "time",
          eval_damped_average, _grid(gamma=(-1.0,), r=(0.25, 0.5, 0.75)), precondition=_r_check),
        E("L7.7", "weighted L2 norm of Gamma_k",
          "||<v>^l Gamma_k(f,f)||_2 <= C ||f||_2 ||<v>^l f||_2^(1+g/3) ||<v>^l f||_inf^(-g/3)",
          "C ||f||_2 ||<v>^l f||_2^(1+g/3) ||<v>^l f||_inf^(-g/3)", "family", eval_gamma_l2,
          _grid(gamma=(-1.0,), k=(4.0,), l=(2.0,)), precondition=_need_gamma(-3.0, 0.0)),
    ]


REGISTRY: dict[str, BoundRegistryEntry] = {e.id: e for e in _entries()}


def entry_ids() -> list[str]:
    return sorted(REGISTRY)
