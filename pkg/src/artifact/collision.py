"""Boltzmann collision operator: Q^+, Q^-, L, nu, K_k, Gamma_k and the kernel l_k.

Pointwise values are computed at arbitrary velocities by quadrature in the
relative velocity u = v - v* (radial Gauss-Jacobi absorbing |u|^(2+gamma),
a product rule for the direction of u) and in sigma (Gauss-Legendre in
cos(theta) about u times a uniform azimuth).  Grid fields are read through a
cubic B-spline with zero extension outside the box.

The compact part K of L is also available through the Carleman form, where
the plane integral reduces to a one-dimensional integral in closed form for
Maxwellian data.  Both paths are kept so they can be checked against each
other.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import ndimage, special

from .errors import ConfigurationError, GridMismatch, NonFiniteField, WeightTooSmall
from .grids import VelocityGrid
from .kernel_geometry import CollisionKernelSpec
from .quadrature import _leggauss, gauss_interval, jacobi_radial
from .weights import MU0, bracket, maxwellian

CACHE_FORMAT_VERSION = 1
CACHE_MAGIC = b"ARTCACHE"


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Distribution:
    """Real values on the nodes of a velocity grid.

    ``weight_context`` is an optional ``(k,)`` or ``(k, a, b)`` tag recording
    which weighted space the caller works in.  It does not change the values.
    """

    grid: VelocityGrid
    values: np.ndarray
    weight_context: tuple | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridMismatch("values do not match the grid shape")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteField("distribution has non-finite values")

    @classmethod
    def from_function(cls, grid: VelocityGrid, fn, weight_context=None) -> "Distribution":
        return cls(grid, grid.sample(fn), weight_context)

    @cached_property
    def _coefficients(self) -> np.ndarray:
        return ndimage.spline_filter(self.values, order=3, mode="grid-constant")

    @cached_property
    def support_radius(self) -> float:
        """Largest |v| over nodes carrying non-negligible values."""
        a = np.abs(self.values)
        top = a.max()
        if top == 0:
            return 0.0
        r = np.linalg.norm(self.grid.nodes[a > 1e-16 * top], axis=-1)
        return float(min(r.max() + self.grid.h, np.sqrt(3.0) * self.grid.v_max))

    def at(self, points: np.ndarray) -> np.ndarray:
        """Cubic-spline interpolant at points of shape (..., 3); zero outside the box."""
        points = np.asarray(points, dtype=float)
        shp = points.shape[:-1]
        coords = self.grid.to_fractional(points.reshape(-1, 3))
        vals = ndimage.map_coordinates(self._coefficients, coords, order=3,
                                       mode="grid-constant", cval=0.0, prefilter=False)
        return vals.reshape(shp)


@dataclass(frozen=True)
class AnalyticField:
    """A field given by a vectorized function of velocity."""

    fn: object
    support_radius: float = 12.0

    def at(self, points):
        return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float)


@dataclass(frozen=True)
class WeightedField:
    """base(v) <v>^(-k): the argument of Gamma_k."""

    base: object
    k: float

    @property
    def support_radius(self) -> float:
        return self.base.support_radius

    def at(self, points):
        return self.base.at(points) * bracket(points) ** (-self.k)


MAXWELLIAN = AnalyticField(maxwellian, support_radius=12.0)


def as_field(f):
    if isinstance(f, (Distribution, AnalyticField, WeightedField)):
        return f
    if callable(f):
        return AnalyticField(f)
    raise ConfigurationError("expected a Distribution or a callable field")


def _common_grid(*fields):
    grids = {id(f.grid): f.grid for f in fields if isinstance(f, Distribution)}
    grids = list(grids.values())
    for g in grids[1:]:
        if g != grids[0]:
            raise GridMismatch("fields live on different grids")
    return grids[0] if grids else None


# ---------------------------------------------------------------------------
# quadrature settings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSettings:
    """Node counts for pointwise collision integrals."""

    n_u: int = 24          # |u|, Gauss-Jacobi
    n_dir_theta: int = 8   # direction of u: GL in cos
    n_dir_phi: int = 16    # direction of u: uniform azimuth
    n_c: int = 6           # cos(theta) between u and sigma
    n_psi: int = 12        # azimuth of sigma about u
    # Carleman-side rules
    n_t_seg: int = 8
    n_rho_seg: int = 8
    n_x_seg: int = 8
    n_azimuth: int = 24

    def key(self) -> dict:
        return dict(self.__dict__)


DEFAULT_SETTINGS = QuadratureSettings()


def _direction_rule(n_theta: int, n_phi: int):
    c, wc = _leggauss(n_theta)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    s = np.sqrt(1.0 - c * c)
    d = np.stack([np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)),
                  np.outer(c, np.ones(n_phi))], axis=-1).reshape(-1, 3)
    w = np.outer(wc, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
    return d, w


def _orthonormal_frames(d: np.ndarray):
    """Two unit vectors completing each row of ``d`` to an orthonormal frame."""
    seed = np.where(np.abs(d[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    e1 = seed - np.sum(seed * d, axis=1, keepdims=True) * d
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(d, e1)
    return e1, e2


@dataclass(frozen=True)
class _SigmaRule:
    c: np.ndarray      # (n_s,)
    s: np.ndarray
    cos_psi: np.ndarray
    sin_psi: np.ndarray
    wb: np.ndarray     # weights times b(c), (n_s,)

    @property
    def bnorm(self) -> float:
        return float(np.sum(self.wb))


def _sigma_rule(spec: CollisionKernelSpec, n_c: int, n_psi: int) -> _SigmaRule:
    lo, hi = spec.c_interval
    c, wc = gauss_interval(n_c, lo, hi)
    psi = 2.0 * np.pi * (np.arange(n_psi) + 0.5) / n_psi
    C, P = np.meshgrid(c, psi, indexing="ij")
    W = np.outer(wc, np.full(n_psi, 2.0 * np.pi / n_psi))
    C = C.ravel()
    return _SigmaRule(c=C, s=np.sqrt(1.0 - C * C), cos_psi=np.cos(P).ravel(),
                      sin_psi=np.sin(P).ravel(), wb=(W.ravel() * spec.b(C)))


# ---------------------------------------------------------------------------
# sigma-representation kernel
# ---------------------------------------------------------------------------

def _gain_loss_points(spec, v, radius, settings):
    """Quadrature nodes for one output velocity ``v``.

    Returns a dict with v* (n_u*n_a, 3), v' and v*' (n_u*n_a, n_s, 3),
    weights for the (u, direction) pairs and the sigma weights w b(c).
    """
    U = float(np.linalg.norm(v)) + np.sqrt(2.0) * radius
    r, wr = jacobi_radial(settings.n_u, U, 2.0 + spec.gamma)
    d, wd = _direction_rule(settings.n_dir_theta, settings.n_dir_phi)
    e1, e2 = _orthonormal_frames(d)
    sr = _sigma_rule(spec, settings.n_c, settings.n_psi)
    sig = (d[:, None, :] * sr.c[None, :, None]
           + (sr.s * sr.cos_psi)[None, :, None] * e1[:, None, :]
           + (sr.s * sr.sin_psi)[None, :, None] * e2[:, None, :])  # (n_a, n_s, 3)
    u = r[:, None, None] * d[None, :, :]                           # (n_u, n_a, 3)
    v_star = v - u
    center = v - 0.5 * u
    half = 0.5 * r[:, None, None, None] * sig[None, :, :, :]       # (n_u, n_a, n_s, 3)
    vp = center[:, :, None, :] + half
    vsp = center[:, :, None, :] - half
    w_pair = (wr[:, None] * wd[None, :]).reshape(-1)
    return {"v_star": v_star.reshape(-1, 3), "vp": vp.reshape(-1, sr.c.size, 3),
            "vsp": vsp.reshape(-1, sr.c.size, 3), "w_pair": w_pair, "wb": sr.wb}


def _prepare_points(points, grid):
    if points is None:
        if grid is None:
            raise ConfigurationError("points are required when no field lives on a grid")
        return grid.nodes.reshape(-1, 3), grid.shape
    pts = np.asarray(points, dtype=float)
    return pts.reshape(-1, 3), pts.shape[:-1]


def _wrap(values, shape, grid, points, context=None):
    values = np.asarray(values).reshape(shape)
    if points is None:
        return Distribution(grid, values, context)
    return values


def collision_terms(spec: CollisionKernelSpec, f, g, points=None,
                    settings: QuadratureSettings = DEFAULT_SETTINGS):
    """(Q^+(f, g), Q^-(f, g)) at ``points`` (or at all grid nodes).

    Q^+(f, g)(v) = int int B f(v*') g(v') dsigma dv* and
    Q^-(f, g)(v) = g(v) int int B f(v*) dsigma dv*.  The same (u, sigma) nodes
    are used for both terms, so Q(mu, mu) cancels up to interpolation error.
    """
    f, g = as_field(f), as_field(g)
    grid = _common_grid(f, g)
    pts, shape = _prepare_points(points, grid)
    radius = max(f.support_radius, g.support_radius)
    plus = np.empty(len(pts))
    minus = np.empty(len(pts))
    for i, v in enumerate(pts):
        q = _gain_loss_points(spec, v, radius, settings)
        fsp = f.at(q["vsp"])
        gp = g.at(q["vp"])
        plus[i] = q["w_pair"] @ ((fsp * gp) @ q["wb"])
        a = q["w_pair"] @ f.at(q["v_star"]) * np.sum(q["wb"])
        minus[i] = a * float(g.at(v[None, :])[0])
    return _wrap(plus, shape, grid, points), _wrap(minus, shape, grid, points)


def q_plus(spec, f, g, points=None, settings=DEFAULT_SETTINGS):
    return collision_terms(spec, f, g, points, settings)[0]


def loss_frequency(spec, f, points, settings=DEFAULT_SETTINGS) -> np.ndarray:
    """int int B f(v*) dsigma dv* at each point."""
    f = as_field(f)
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    out = np.empty(len(pts))
    for i, v in enumerate(pts):
        U = float(np.linalg.norm(v)) + np.sqrt(2.0) * f.support_radius
        r, wr = jacobi_radial(settings.n_u, U, 2.0 + spec.gamma)
        d, wd = _direction_rule(settings.n_dir_theta, settings.n_dir_phi)
        sr = _sigma_rule(spec, settings.n_c, settings.n_psi)
        vs = v - r[:, None, None] * d[None, :, :]
        out[i] = np.sum(wr[:, None] * wd[None, :] * f.at(vs)) * np.sum(sr.wb)
    return out.reshape(np.asarray(points).shape[:-1])


def q_minus(spec, f, g, points=None, settings=DEFAULT_SETTINGS):
    """Q^-(f, g) = g(v) * loss_frequency(f)(v)."""
    f, g = as_field(f), as_field(g)
    grid = _common_grid(f, g)
    pts, shape = _prepare_points(points, grid)
    vals = g.at(pts) * loss_frequency(spec, f, pts, settings)
    return _wrap(vals, shape, grid, points)


def q_collision(spec, f, g, points=None, settings=DEFAULT_SETTINGS):
    p, m = collision_terms(spec, f, g, points, settings)
    if isinstance(p, Distribution):
        return Distribution(p.grid, p.values - m.values)
    return p - m


def q_grid_sum(spec: CollisionKernelSpec, f: Distribution, g: Distribution, points,
               n_theta: int = 8, n_phi: int = 16):
    """Literal grid-sum version of (Q^+, Q^-) with v* running over grid nodes.

    Returns ``(plus, minus, skipped)`` where ``skipped`` counts the diagonal
    cells v* = v dropped because |v - v*|^gamma is singular.
    """
    grid = _common_grid(f, g)
    if grid is None:
        raise ConfigurationError("grid summation needs grid fields")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    vs_all = grid.nodes.reshape(-1, 3)
    fvals = f.values.reshape(-1)
    c_nodes, wc = gauss_interval(n_theta, *spec.c_interval)
    psi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    h3 = grid.h ** 3
    plus = np.zeros(len(pts))
    minus = np.zeros(len(pts))
    skipped = 0
    for i, v in enumerate(pts):
        u = v - vs_all
        un = np.linalg.norm(u, axis=1)
        keep = un > 1e-12 * grid.h
        if spec.gamma < 0:
            skipped += int(np.sum(~keep))
        else:
            keep = np.ones_like(keep)
        uu, vv, unk, fk = u[keep], vs_all[keep], un[keep], fvals[keep]
        safe = np.where(unk > 0, unk, 1.0)
        d = uu / safe[:, None]
        d = np.where(unk[:, None] > 0, d, np.array([0.0, 0.0, 1.0]))
        e1, e2 = _orthonormal_frames(d)
        radial = np.where(unk > 0, unk, 0.0) ** spec.gamma if spec.gamma != 0 else np.ones_like(unk)
        center = 0.5 * (v + vv)
        acc = np.zeros(len(uu))
        for c, w in zip(c_nodes, wc):
            s = np.sqrt(1.0 - c * c)
            for ps in psi:
                sig = c * d + s * (np.cos(ps) * e1 + np.sin(ps) * e2)
                half = 0.5 * unk[:, None] * sig
                acc += (w * 2.0 * np.pi / n_phi * float(spec.b(c))
                        * f.at(center - half) * g.at(center + half))
        plus[i] = h3 * np.sum(radial * acc)
        bn = float(np.sum(wc * spec.b(c_nodes))) * 2.0 * np.pi
        minus[i] = h3 * np.sum(radial * fk) * bn * float(g.at(v[None])[0])
    return plus, minus, skipped


def conservative_correction(grid: VelocityGrid, q: np.ndarray) -> np.ndarray:
    """Smallest mu^{-1}-weighted change making the grid moments of ``q`` vanish.

    The correction lies in span{mu, v_i mu, |v|^2 mu}.
    """
    v = grid.nodes.reshape(-1, 3)
    mu = maxwellian(v)
    phi = np.stack([np.ones(len(v)), v[:, 0], v[:, 1], v[:, 2], np.sum(v * v, axis=1)])
    qv = np.asarray(q, dtype=float).reshape(-1)
    A = (phi * mu) @ phi.T
    lam = np.linalg.solve(A, phi @ qv)
    return (qv - mu * (lam @ phi)).reshape(np.shape(q))


# ---------------------------------------------------------------------------
# linearized operator
# ---------------------------------------------------------------------------

def linearized_terms(spec, f, points=None, settings=DEFAULT_SETTINGS):
    """Gain part Q^+(mu, f) + Q^+(f, mu), loss part Q^-(mu, f) + Q^-(f, mu).

    mu enters analytically; only ``f`` is interpolated.
    """
    f = as_field(f)
    grid = _common_grid(f)
    pts, shape = _prepare_points(points, grid)
    radius = max(f.support_radius, MAXWELLIAN.support_radius)
    gain = np.empty(len(pts))
    loss = np.empty(len(pts))
    for i, v in enumerate(pts):
        q = _gain_loss_points(spec, v, radius, settings)
        vp, vsp = q["vp"], q["vsp"]
        inner = maxwellian(vsp) * f.at(vp) + f.at(vsp) * maxwellian(vp)
        gain[i] = q["w_pair"] @ (inner @ q["wb"])
        bn = np.sum(q["wb"])
        vs = q["v_star"]
        loss[i] = bn * (float(f.at(v[None])[0]) * (q["w_pair"] @ maxwellian(vs))
                        + maxwellian(v) * (q["w_pair"] @ f.at(vs)))
    return _wrap(gain, shape, grid, points), _wrap(loss, shape, grid, points)


def linearized_L(spec, f, points=None, settings=DEFAULT_SETTINGS):
    """L f = Q(mu, f) + Q(f, mu)."""
    gain, loss = linearized_terms(spec, f, points, settings)
    if isinstance(gain, Distribution):
        return Distribution(gain.grid, gain.values - loss.values)
    return gain - loss


# ---------------------------------------------------------------------------
# collision frequency
# ---------------------------------------------------------------------------

def nu_radial(spec: CollisionKernelSpec, s, n: int = 200) -> np.ndarray:
    """nu as a function of |v|.

    nu(v) = ||b|| int |u|^gamma mu(v - u) du; the angular part of the u
    integral is done in closed form.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty_like(s)
    bn = spec.angular_norm()
    for i, si in enumerate(s.ravel()):
        if si > 12.0:
            # the integrand vanishes near r = 0; plain GL around the peak r = s
            r, w = gauss_interval(n // 8, np.linspace(si - 12.0, si + 12.0, 9)[:-1],
                                  np.linspace(si - 12.0, si + 12.0, 9)[1:])
            r, w = r.ravel(), (w * r ** (2.0 + spec.gamma)).ravel()
        else:
            r, w = jacobi_radial(n, si + 12.0, 2.0 + spec.gamma)
        if si < 1e-8:
            ang = 4.0 * np.pi * MU0 * np.exp(-0.5 * r * r)
        else:
            ang = (2.0 * np.pi * MU0 * (np.exp(-0.5 * (r - si) ** 2) - np.exp(-0.5 * (r + si) ** 2))
                   / (si * r))
        out.ravel()[i] = bn * np.dot(w, ang)
    return out


def nu(spec: CollisionKernelSpec, v) -> np.ndarray | float:
    """Collision frequency nu(v) = int int B mu(v*) dsigma dv*."""
    v = np.asarray(v, dtype=float)
    s = np.linalg.norm(v, axis=-1)
    uniq, inv = np.unique(np.round(s, 13), return_inverse=True)
    vals = nu_radial(spec, uniq)[inv].reshape(s.shape)
    return float(vals) if vals.ndim == 0 else vals


@dataclass(eq=False)
class CollisionFrequency:
    """nu on the nodes of a grid, computed once."""

    spec: CollisionKernelSpec
    grid: VelocityGrid
    values: np.ndarray = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(nu(self.spec, self.grid.nodes))
        if np.any(self.values <= 0):
            raise ConfigurationError("collision frequency must be positive")

    def envelope(self) -> tuple[float, float]:
        """(min, max) of nu(v) / <v>^gamma over the grid."""
        ratio = self.values / bracket(self.grid.nodes) ** self.spec.gamma
        return float(ratio.min()), float(ratio.max())


# ---------------------------------------------------------------------------
# Carleman kernel l_k
# ---------------------------------------------------------------------------

def _symmetric_profile(spec, c):
    return spec.b(c) + spec.b(-c)


def _t_rule(rho, s, n_seg):
    """Nodes and weights for int_0^inf dt of the plane integrand, per (rho, s) row.

    Breakpoints at t = rho (where cos(theta) changes sign), geometric points
    beyond rho, and a dense window around the Gaussian peak at t = s.  Each
    segment is mapped through t = rho sinh(xi).
    """
    rho = np.asarray(rho, dtype=float).reshape(-1)
    s = np.asarray(s, dtype=float).reshape(-1)
    tmax = s + 10.0
    J = 8
    q = (np.maximum(tmax / rho, 1.0 + 1e-12)) ** (1.0 / J)
    geo = rho[:, None] * q[:, None] ** np.arange(1, J + 1)[None, :]
    peak = s[:, None] + np.linspace(-6.0, 6.0, 13)[None, :]
    brk = np.concatenate([np.zeros((len(rho), 1)), rho[:, None], geo, peak, tmax[:, None]], axis=1)
    brk = np.sort(np.clip(brk, 0.0, tmax[:, None]), axis=1)
    xi = np.arcsinh(brk / rho[:, None])
    x, w = _leggauss(n_seg)
    a, b = xi[:, :-1, None], xi[:, 1:, None]
    half = 0.5 * (b - a)
    XI = a + half * (x + 1.0)
    t = rho[:, None, None] * np.sinh(XI)
    wt = half * w * rho[:, None, None] * np.cosh(XI)
    return t.reshape(len(rho), -1), wt.reshape(len(rho), -1)


def plane_profile(spec: CollisionKernelSpec, rho, s, n_seg: int = 8) -> np.ndarray:
    """G(rho, s) = 2 pi int_0^inf t r^(gamma-1) [b(c)+b(-c)] e^{-(t-s)^2/2} I0e(s t) dt.

    r = (rho^2 + t^2)^(1/2) and c = (t^2 - rho^2) / (t^2 + rho^2).
    """
    rho = np.asarray(rho, dtype=float)
    s = np.broadcast_to(np.asarray(s, dtype=float), rho.shape)
    t, w = _t_rule(rho, s, n_seg)
    R = rho.reshape(-1, 1)
    S = s.reshape(-1, 1)
    r2 = R * R + t * t
    c = (t * t - R * R) / r2
    integrand = (t * r2 ** (0.5 * (spec.gamma - 1.0)) * _symmetric_profile(spec, c)
                 * np.exp(-0.5 * (t - S) ** 2) * special.i0e(S * t))
    return (2.0 * np.pi * np.sum(w * integrand, axis=1)).reshape(rho.shape)


def _kernel_parts(spec, v, vp, n_seg=8):
    """(l_2, l_1) for arrays of v and v' broadcast to a common shape (..., 3)."""
    v, vp = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(vp, dtype=float))
    d = vp - v
    rho = np.linalg.norm(d, axis=-1)
    if np.any(rho == 0):
        raise ConfigurationError("l_k is singular at v' = v")
    p = np.sum(v * d, axis=-1) / rho
    s = np.sqrt(np.maximum(np.sum(v * v, axis=-1) - p * p, 0.0))
    G = plane_profile(spec, rho, s, n_seg)
    l2 = 4.0 / rho * MU0 * np.exp(-0.5 * p * p) * G
    l1 = maxwellian(v) * spec.angular_norm() * rho ** spec.gamma
    return l2, l1


def check_weight(spec: CollisionKernelSpec, k: float):
    if k <= max(3.0, 3.0 + spec.gamma):
        raise WeightTooSmall(f"k = {k} must exceed max(3, 3 + gamma) = {max(3.0, 3.0 + spec.gamma)}")


def l_k_value(spec, k, v, v_prime) -> np.ndarray | float:
    """Kernel of K_k: <v>^k (l_2 - l_1)(v, v') <v'>^(-k)."""
    check_weight(spec, k)
    l2, l1 = _kernel_parts(spec, v, v_prime)
    out = bracket(v) ** k * (l2 - l1) * bracket(v_prime) ** (-k)
    return float(out) if np.ndim(out) == 0 else out


def _rho_rule(v_norm, rho_max, n_seg, extra_breaks=()):
    """Composite GL in rho graded toward 0 and geometric toward rho_max."""
    inner = [0.0] + [2.0 ** -j for j in range(10, 0, -1)]
    outer = list(np.geomspace(1.0, max(rho_max, 2.0), 12))
    brk = np.unique(np.clip(np.array(inner + outer + list(extra_breaks)), 0.0, rho_max))
    x, w = gauss_interval(n_seg, brk[:-1], brk[1:])
    return x.ravel(), w.ravel()


def _x_rule(v_norm, n_seg):
    """Rule for the cosine between v' - v and v, clustered at 0 on scale 1/<v>."""
    wdt = 1.0 / np.sqrt(1.0 + v_norm ** 2)
    pts = sorted({-1.0, 1.0, 0.0} | {float(np.clip(sg * m * wdt, -1, 1))
                                     for sg in (-1, 1) for m in (0.5, 1, 2, 4, 8)})
    x, w = gauss_interval(n_seg, np.array(pts[:-1]), np.array(pts[1:]))
    return x.ravel(), w.ravel()


def _polar_about(v, rho, x, n_az):
    """Points v + rho e with e at cosine x to v (or to e_z when v = 0)."""
    vn = np.linalg.norm(v)
    ax = v / vn if vn > 0 else np.array([0.0, 0.0, 1.0])
    e1, e2 = _orthonormal_frames(ax[None, :])
    phi = 2.0 * np.pi * (np.arange(n_az) + 0.5) / n_az
    sx = np.sqrt(1.0 - x * x)
    e = (x[:, None, None] * ax + sx[:, None, None]
         * (np.cos(phi)[None, :, None] * e1[0] + np.sin(phi)[None, :, None] * e2[0]))
    return v + rho[:, None, None, None] * e[None, :, :, :]   # (n_rho, n_x, n_az, 3)


def kernel_integral(spec, k, v, fn=None, *, modulus=False, v_prime_power=0.0,
                    rho_window=None, settings=DEFAULT_SETTINGS, rho_max=None,
                    support=None) -> float:
    """int l_k(v, v') F(v') dv' by polar quadrature about v.

    With ``modulus`` the absolute value of l_k is integrated.  ``fn`` defaults to
    1 and is multiplied by <v'>^(-v_prime_power).  ``rho_window = (lo, hi)``
    excludes lo < |v - v'| < hi.  ``k`` is not range-checked here.
    """
    v = np.asarray(v, dtype=float)
    vn = float(np.linalg.norm(v))
    if rho_max is None:
        rho_max = vn + (support if support is not None else 400.0)
    extra = [] if rho_window is None else [min(rho_window[0], rho_max), min(rho_window[1], rho_max)]
    rho, wr = _rho_rule(vn, rho_max, settings.n_rho_seg, extra)
    if rho_window is not None:
        lo, hi = rho_window
        wr = np.where((rho > lo) & (rho < hi), 0.0, wr)
    x, wx = _x_rule(vn, settings.n_x_seg)
    n_az = settings.n_azimuth if vn > 0 else 1
    if fn is None:
        n_az = 1  # integrand depends on v' only through rho and x
    pts = _polar_about(v, rho, x, n_az)
    p = vn * x
    s = vn * np.sqrt(1.0 - x * x)
    R, P = np.meshgrid(rho, p, indexing="ij")
    S = np.broadcast_to(s[None, :], R.shape)
    G = plane_profile(spec, R, S, settings.n_t_seg)
    l2 = 4.0 / R * MU0 * np.exp(-0.5 * P * P) * G
    l1 = maxwellian(v) * spec.angular_norm() * R ** spec.gamma
    lk = (l2 - l1)[:, :, None] * bracket(v) ** k * bracket(pts) ** (-k)
    if modulus:
        lk = np.abs(lk)
    vals = lk * bracket(pts) ** (-v_prime_power)
    if fn is not None:
        vals = vals * fn(pts)
    w = (wr * rho * rho)[:, None, None] * wx[None, :, None] * (2.0 * np.pi / n_az)
    return float(np.sum(w * vals))


def k_apply(spec, f, points=None, settings=DEFAULT_SETTINGS):
    """K f = (L + nu) f through the Carleman kernel."""
    f = as_field(f)
    grid = _common_grid(f)
    pts, shape = _prepare_points(points, grid)
    out = np.array([kernel_integral(spec, 0.0, v, f.at, settings=settings,
                                    support=f.support_radius + 1.0) for v in pts])
    return _wrap(out, shape, grid, points)


def k_k_apply(spec, k, f, points=None, settings=DEFAULT_SETTINGS):
    """K_k f = <v>^k K(<v>^(-k) f)."""
    check_weight(spec, k)
    f = as_field(f)
    grid = _common_grid(f)
    pts, shape = _prepare_points(points, grid)
    out = np.array([kernel_integral(spec, k, v, f.at, settings=settings,
                                    support=f.support_radius + 1.0) for v in pts])
    ctx = None if grid is None else (k,)
    return _wrap(out, shape, grid, points, ctx)


# ---------------------------------------------------------------------------
# Gamma_k
# ---------------------------------------------------------------------------

def gamma_k_terms(spec, k, f, g, points=None, settings=DEFAULT_SETTINGS):
    """(Gamma_k^+, Gamma_k^-)(f, g) = <v>^k Q^(+/-)(f <v>^-k, g <v>^-k)."""
    check_weight(spec, k)
    f, g = as_field(f), as_field(g)
    grid = _common_grid(f, g)
    pts, shape = _prepare_points(points, grid)
    plus, minus = collision_terms(spec, WeightedField(f, k), WeightedField(g, k), pts, settings)
    w = bracket(pts) ** k
    return (_wrap(w * plus, shape, grid, points, (k,)),
            _wrap(w * minus, shape, grid, points, (k,)))


def gamma_k(spec, k, f, g, points=None, settings=DEFAULT_SETTINGS):
    p, m = gamma_k_terms(spec, k, f, g, points, settings)
    if isinstance(p, Distribution):
        return Distribution(p.grid, p.values - m.values, (k,))
    return p - m


# ---------------------------------------------------------------------------
# probe points and caches
# ---------------------------------------------------------------------------

def probe_nodes(grid: VelocityGrid, count: int = 64, radius_fraction: float = 0.75) -> np.ndarray:
    """Deterministic subset of grid nodes used for sup-norm estimates.

    Nodes with |v| <= radius_fraction * v_max are ordered by (|v|, index) and
    ``count`` of them are taken at evenly spaced ranks; the node nearest the
    origin is always included.
    """
    v = grid.nodes.reshape(-1, 3)
    r = np.linalg.norm(v, axis=1)
    idx = np.flatnonzero(r <= radius_fraction * grid.v_max)
    idx = idx[np.lexsort((idx, r[idx]))]
    take = np.unique(np.linspace(0, len(idx) - 1, min(count, len(idx))).round().astype(int))
    return v[idx[take]]


def cache_header(spec: CollisionKernelSpec, k, grid: VelocityGrid | None, sphere: dict,
                 seed: int = 0) -> dict:
    return {"format_version": CACHE_FORMAT_VERSION, "gamma": float(spec.gamma),
            "kernel": spec.key(), "k": None if k is None else float(k),
            "grid": None if grid is None else grid.key(), "sphere": dict(sphere),
            "seed": int(seed)}


def cache_name(header: dict) -> str:
    blob = json.dumps(header, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:24] + ".bin"


def save_cache(path, header: dict, arrays: dict) -> None:
    """Binary cache: magic, 4-byte header length, JSON header, npz payload."""
    hb = json.dumps(header, sort_keys=True).encode()
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(len(hb).to_bytes(4, "little"))
        fh.write(hb)
        fh.write(buf.getvalue())
    tmp.replace(path)


def load_cache(path, expected_header: dict | None = None):
    """Return ``(header, arrays)``; ``None`` if missing or the header does not match."""
    path = Path(path)
    if not path.exists():
        return None
    data = path.read_bytes()
    if not data.startswith(CACHE_MAGIC):
        return None
    n = int.from_bytes(data[8:12], "little")
    header = json.loads(data[12:12 + n])
    if header.get("format_version") != CACHE_FORMAT_VERSION:
        return None
    if expected_header is not None and header != json.loads(json.dumps(expected_header, sort_keys=True)):
        return None
    with np.load(io.BytesIO(data[12 + n:])) as z:
        arrays = {key: z[key] for key in z.files}
    return header, arrays


def cached_frequency(spec, grid, cache_dir=None) -> CollisionFrequency:
    """CollisionFrequency, reusing a disk cache when ``cache_dir`` is given."""
    if cache_dir is None:
        return CollisionFrequency(spec, grid)
    header = cache_header(spec, None, grid, {"kind": "nu"})
    path = Path(cache_dir) / cache_name(header)
    hit = load_cache(path, header)
    cf = CollisionFrequency.__new__(CollisionFrequency)
    cf.spec, cf.grid = spec, grid
    if hit is not None:
        cf.values = hit[1]["nu"]
        return cf
    cf = CollisionFrequency(spec, grid)
    save_cache(path, header, {"nu": cf.values})
    return cf
