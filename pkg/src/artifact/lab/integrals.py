"""Quadratures for the left-hand sides of the registered bounds.

Every velocity integral here is rotation invariant in v, so it is evaluated
at v = |v| e_1.  Radial test functions carry their antiderivative
Phi(s) = int_0^s t F(t) dt, which turns the polar angular integral about v
into a difference of Phi values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from ..collision import _t_rule, plane_profile
from ..kernel_geometry import CollisionKernelSpec
from ..quadrature import composite
from ..weights import MU0


def bracket_r(r):
    return np.sqrt(1.0 + np.asarray(r, dtype=float) ** 2)


# ---------------------------------------------------------------------------
# radial test profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """Radial function F(|v|) with closed-form pieces.

    ``phi_diff(a, b)`` returns Phi(b) - Phi(a) for Phi(s) = int_0^s t F(t) dt,
    written without cancellation against the total mass.
    """

    label: str
    value: Callable
    phi_diff: Callable
    derivative: Callable
    reach: float  # radius beyond which F is negligible or power-law

    def lp_norm(self, p: float, weight_power: float = 0.0, n: int = 64) -> float:
        """|| <v>^w F ||_{L^p}; p = inf gives the sup over |v| <= 64 reach."""
        r, w = radial_rule(self.reach, n)
        vals = bracket_r(r) ** weight_power * np.abs(self.value(r))
        if np.isinf(p):
            return float(vals.max())
        return float((4.0 * np.pi * np.dot(w, r * r * vals ** p)) ** (1.0 / p))


def radial_rule(reach: float, n: int):
    """Rule on [0, inf) for functions that are smooth with scale 1 and reach ``reach``."""
    inner = np.linspace(0.0, reach, 9)
    outer = reach * np.geomspace(1.0, 1e6, 16)[1:]
    return composite(np.concatenate([inner, outer]), max(n // 8, 4))


def bracket_power(m: float) -> RadialProfile:
    """F = <v>^(-m), m > 2."""
    def phi_diff(a, b):
        return ((1.0 + a * a) ** (1.0 - 0.5 * m) - (1.0 + b * b) ** (1.0 - 0.5 * m)) / (m - 2.0)

    def deriv(r):
        return -m * r * (1.0 + r * r) ** (-0.5 * m - 1.0)

    return RadialProfile(f"bracket^-{m:g}", lambda r: (1.0 + r * r) ** (-0.5 * m),
                         phi_diff, deriv, reach=8.0)


def gaussian(temperature: float, amplitude: float = 1.0) -> RadialProfile:
    """F = A exp(-|v|^2 / (2 T))."""
    T = float(temperature)

    def phi_diff(a, b):
        return amplitude * T * (np.exp(-0.5 * a * a / T) - np.exp(-0.5 * b * b / T))

    def deriv(r):
        return -amplitude * r / T * np.exp(-0.5 * r * r / T)

    return RadialProfile(f"gauss(T={T:g},A={amplitude:g})",
                         lambda r: amplitude * np.exp(-0.5 * r * r / T),
                         phi_diff, deriv, reach=10.0 * np.sqrt(T))


# ---------------------------------------------------------------------------
# potentials  int |v - v*|^gamma F(v*) dv*
# ---------------------------------------------------------------------------

def _rho_breaks(r: float, reach: float, extra=()):
    pts = [0.0] + [2.0 ** -j for j in range(14, 0, -1)]
    pts += list(np.geomspace(1.0, 1e7 * max(reach, 1.0), 40))
    if r > 0:
        pts += [r * (1 + d) for d in (-0.5, -0.1, -1e-2, -1e-3, 0.0, 1e-3, 1e-2, 0.1, 0.5)]
        pts += [r + d for d in (-8.0, -4.0, -2.0, -1.0, 1.0, 2.0, 4.0, 8.0)]
    pts += list(extra)
    return np.unique(np.clip(np.array(pts), 0.0, None))


def potential(profile: RadialProfile, r: float, gamma: float, n_seg: int = 8,
              window=None) -> float:
    """int |v - v*|^gamma F(|v*|) dv* at |v| = r.

    ``window = (lo, hi)`` restricts to lo <= |v - v*| <= hi; ``None`` is the
    whole space.
    """
    r = float(r)
    extra = [] if window is None else [w for w in window if np.isfinite(w)]
    brk = _rho_breaks(r, profile.reach, extra)
    lo, hi = (0.0, np.inf) if window is None else window
    brk = brk[(brk >= lo) & (brk <= hi)]
    brk = np.unique(np.concatenate([[lo], brk, [min(hi, brk[-1])]]))
    rho, w = composite(brk, n_seg)
    if r == 0.0:
        ang = 4.0 * np.pi * profile.value(rho) * rho * rho
    else:
        ang = 2.0 * np.pi * rho / r * profile.phi_diff(np.abs(r - rho), r + rho)
    return float(np.dot(w, rho ** gamma * ang))


def double_potential(F: RadialProfile, G: RadialProfile, gamma: float, n: int = 48) -> float:
    """int int |v - v*|^gamma F(v*) G(v) dv dv* for radial F and G."""
    r, w = radial_rule(G.reach, n)
    pot = np.array([potential(F, ri, gamma) for ri in r])
    return float(4.0 * np.pi * np.dot(w, r * r * G.value(r) * pot))


# ---------------------------------------------------------------------------
# Carleman gain integrals  int int |u|^gamma g(v') h(v*') dsigma dv*  (full sphere)
# ---------------------------------------------------------------------------

def _outer_rules(r: float, rho_max: float, n_seg: int, extra_rho=(), axis_grading: bool = False):
    brk = [0.0] + [2.0 ** -j for j in range(12, 0, -1)] + list(np.geomspace(1.0, rho_max, 16))
    if r > 0:
        brk += [r + d for d in (-4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0)]
    brk += list(extra_rho)
    brk = np.unique(np.clip(np.array(brk), 0.0, rho_max))
    rho, wr = composite(brk, n_seg)
    width = 1.0 / bracket_r(r)
    xb = {-1.0, 0.0, 1.0}
    for sg in (-1.0, 1.0):
        xb |= {float(np.clip(sg * m * width, -1, 1)) for m in (1e-3, 1e-2, 0.1, 0.5, 1, 2, 4, 8)}
        if axis_grading:
            xb |= {float(sg * (1.0 - 10.0 ** -j)) for j in range(1, 10)}
    xb = np.array(sorted(xb))
    x, wx = composite(xb, n_seg)
    return rho, wr, x, wx


def carleman_gain(gamma: float, r: float, g: Callable, h: Callable | None = None, *,
                  rho_window=None, n_seg: int = 8, n_phi: int = 24,
                  rho_max: float | None = None, axis_grading: bool = False) -> float:
    """int_{R^3} int_{S^2} |v - v*|^gamma g(|v'|) h(|v*'|^2) dsigma dv* at |v| = r.

    The sigma integral runs over the whole sphere with unit angular weight.
    ``h = None`` means h = exp(-|v*'|^2 / 2).  ``g`` receives |v'| and may
    return a stack of shape (m, ...) to integrate m weights at once.  With
    ``rho_window = (lo, hi)`` only |v - v'| outside (lo, hi) contributes.
    """
    r = float(r)
    if rho_max is None:
        rho_max = r + 400.0
    extra = [] if rho_window is None else [min(x, rho_max) for x in rho_window if np.isfinite(x)]
    rho, wr, x, wx = _outer_rules(r, rho_max, n_seg, extra, axis_grading)
    if rho_window is not None:
        lo, hi = rho_window
        wr = np.where((rho > lo) & (rho < hi), 0.0, wr)
    keep = wr > 0
    rho, wr = rho[keep], wr[keep]
    R, X = np.meshgrid(rho, x, indexing="ij")
    P = r * X
    S = np.broadcast_to(r * np.sqrt(1.0 - x * x)[None, :], R.shape)
    vp = np.sqrt(np.maximum(r * r + R * R + 2.0 * r * R * X, 0.0))
    if h is None:
        spec = CollisionKernelSpec.named(gamma)
        # hemisphere b = 1 gives b(c) + b(-c) = 1 everywhere: the full-sphere weight
        plane = np.exp(-0.5 * P * P) * plane_profile(spec, R, S, n_seg)
    else:
        plane = _general_plane(gamma, R.ravel(), P.ravel(), S.ravel(), h, n_seg, n_phi).reshape(R.shape)
    vals = 4.0 / R * g(vp) * plane
    w = (wr * rho * rho)[:, None] * wx[None, :] * 2.0 * np.pi
    out = np.sum(w * vals, axis=(-2, -1))
    return float(out) if np.ndim(out) == 0 else out


def _general_plane(gamma, rho, p, s, h, n_seg, n_phi):
    """int_plane (rho^2 + |w|^2)^((gamma-1)/2) h(|v + w|^2) dw for each row."""
    t, wt = _t_rule(rho, s, max(n_seg // 2, 4))
    out = np.empty(len(rho))
    base = 1.0 + p * p
    chunk = 512
    for i0 in range(0, len(rho), chunk):
        sl = slice(i0, i0 + chunk)
        T, W = t[sl], wt[sl]
        S = s[sl, None]
        delta = np.sqrt((base[sl, None] + (T - S) ** 2) / np.maximum(4.0 * S * T, 1e-300))
        x = -1.0 + (2.0 * np.arange(n_phi) + 1.0) / n_phi
        tt = np.tan(0.5 * np.pi * x)
        d = np.clip(delta, 1e-8, 1.0)[..., None]
        psi = 2.0 * np.arctan(d * tt)
        dpsi = np.pi * d * (1.0 + tt * tt) / (1.0 + (d * tt) ** 2) * (2.0 / n_phi)
        q = (p[sl, None, None] ** 2 + (T[..., None] - S[..., None]) ** 2
             + 2.0 * S[..., None] * T[..., None] * (1.0 - np.cos(psi)))
        acc = np.sum(dpsi * h(q), axis=-1)
        kern = T * (rho[sl, None] ** 2 + T * T) ** (0.5 * (gamma - 1.0))
        out[sl] = np.sum(W * kern * acc, axis=1)
    return out


def kernel_mass_profile(spec: CollisionKernelSpec, k: float, r: float, *, n_seg: int = 8,
                        extra_breaks=(), rho_max: float | None = None):
    """Radial pieces of int |l_k(v, v')| <v'>^(-j) dv' for j = 0, 2.

    Returns ``(rho, mass0, mass2)`` with per-node contributions, so that
    windows in |v - v'| are applied by masking (put window edges into
    ``extra_breaks``).
    """
    r = float(r)
    if rho_max is None:
        rho_max = r + 400.0
    rho, wr, x, wx = _outer_rules(r, rho_max, n_seg, extra_breaks)
    R, X = np.meshgrid(rho, x, indexing="ij")
    P = r * X
    S = np.broadcast_to(r * np.sqrt(1.0 - x * x)[None, :], R.shape)
    vp2 = np.maximum(r * r + R * R + 2.0 * r * R * X, 0.0)
    G = plane_profile(spec, R, S, n_seg)
    l2 = 4.0 / R * MU0 * np.exp(-0.5 * P * P) * G
    l1 = MU0 * np.exp(-0.5 * r * r) * spec.angular_norm() * R ** spec.gamma
    lk = np.abs(l2 - l1) * (1.0 + r * r) ** (0.5 * k) * (1.0 + vp2) ** (-0.5 * k)
    w = (wr * rho * rho)[:, None] * wx[None, :] * 2.0 * np.pi
    m0 = np.sum(w * lk, axis=1)
    m2 = np.sum(w * lk / (1.0 + vp2), axis=1)
    return rho, m0, m2


# ---------------------------------------------------------------------------
# scalar integrals
# ---------------------------------------------------------------------------

def semigroup_convolution(l1: float, l2: float, t, n: int = 32):
    """int_0^t exp(-l1 (t - s)) exp(-l2 s) ds by Gauss-Legendre."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        if ti == 0:
            out[i] = 0.0
            continue
        brk = np.unique(np.clip(np.concatenate([[0.0], ti - np.geomspace(1e-3, ti, 12)[::-1], [ti]]), 0, ti))
        brk = np.unique(np.concatenate([brk, np.minimum(np.geomspace(1e-3, ti, 12), ti)]))
        s, w = composite(brk, n // 4)
        out[i] = np.dot(w, np.exp(-l1 * (ti - s) - l2 * s))
    return out


def damped_average(nu: float, r: float, t, n: int = 32):
    """int_0^t exp(-nu (t - s)) nu (1 + s)^(-r) ds."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        if ti == 0:
            out[i] = 0.0
            continue
        g = np.geomspace(1e-4, ti, 16)
        brk = np.unique(np.clip(np.concatenate([[0.0, ti], ti - g, g]), 0, ti))
        s, w = composite(brk, n // 4)
        out[i] = np.dot(w, np.exp(-nu * (ti - s)) * nu * (1.0 + s) ** (-r))
    return out


def sup_power_exp(k: float, a: float, b: float, n_scan: int = 20001) -> tuple[float, float]:
    """sup over 0 < x <= b of x^k exp(-a x) by a dense scan refined with Brent's method."""
    from scipy.optimize import minimize_scalar

    x = np.linspace(0.0, b, n_scan)[1:]
    vals = x ** k * np.exp(-a * x)
    i = int(np.argmax(vals))
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
    if i == len(x) - 1:
        return float(vals[i]), float(x[i])
    res = minimize_scalar(lambda y: -(y ** k) * np.exp(-a * y), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    best = max(float(-res.fun), float(vals[i]))
    return best, float(res.x)


def beta_function(p: float, q):
    return special.beta(p, np.asarray(q, dtype=float))
