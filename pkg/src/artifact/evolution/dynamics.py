"""Time integration, Picard iteration and monitoring for the homogeneous problem."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import special

from ..collision import cache_header, cache_name, check_weight, load_cache, save_cache
from ..errors import (
    ConfigurationError,
    NegativeDensity,
    NoContraction,
    NonFinite,
    StabilityViolation,
)
from ..kernel_geometry import CollisionKernelSpec
from ..quadrature import _leggauss
from ..weights import MU0, ExpWeight, PolyWeight, maxwellian_radial
from .radial import (
    ChannelField,
    GainTensor,
    RadialGrid,
    channel_matrix,
    conservative_projector,
    frequency_on_nodes,
    gain_tensor,
)

MODES = ("linearized", "nonlinear", "picard")
NEGATIVITY_TOL = 1e-8


def _context_weight(ctx):
    ctx = tuple(ctx) if isinstance(ctx, (tuple, list)) else (ctx,)
    if len(ctx) == 1:
        return PolyWeight(float(ctx[0]))
    if len(ctx) == 3:
        return ExpWeight(float(ctx[0]), float(ctx[1]), float(ctx[2]))
    raise ConfigurationError(f"weight context {ctx!r} must be (k,) or (k, a, b)")


def context_label(ctx) -> str:
    ctx = tuple(ctx) if isinstance(ctx, (tuple, list)) else (ctx,)
    if len(ctx) == 1:
        return f"L2_k{ctx[0]:g}"
    return f"L2_k{ctx[0]:g}_a{ctx[1]:g}_b{ctx[2]:g}"


@dataclass(frozen=True)
class EvolutionConfig:
    """Run parameters.

    ``monitor_norms`` lists weight contexts: ``(k,)`` for <v>^k or ``(k, a, b)``
    for <v>^k e^{a <v>^b}.  ``project_initial`` defaults to True except in
    linearized mode.
    """

    spec: CollisionKernelSpec
    mode: str = "linearized"
    dt: float = 0.05
    t_end: float = 5.0
    monitor_norms: tuple = ((0,),)
    grid: RadialGrid = field(default_factory=RadialGrid)
    channels: tuple = (0, 1, 2)
    project_initial: bool | None = None
    sample_every: int = 1
    cache_dir: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if not (self.dt > 0 and self.t_end > 0):
            raise ConfigurationError("dt and t_end must be positive")
        for ctx in self.monitor_norms:
            _context_weight(ctx)
        nu_max = float(np.max(frequency_on_nodes(self.spec, self.grid)))
        if self.dt * nu_max >= 1.0:
            raise StabilityViolation(f"dt * max nu = {self.dt * nu_max:.3g} must be < 1")
        if self.mode != "linearized" and 0 not in self.channels:
            raise ConfigurationError("nonlinear modes need the isotropic channel")

    @property
    def projects_initial(self) -> bool:
        if self.project_initial is None:
            return self.mode != "linearized"
        return bool(self.project_initial)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _channel_matrix_cached(spec, grid, l, cache_dir):
    if cache_dir is None:
        return channel_matrix(spec, grid, l)
    header = cache_header(spec, None, None, {"kind": "channel", "l": int(l), "radial": grid.key()})
    path = Path(cache_dir) / cache_name(header)
    hit = load_cache(path, header)
    if hit is not None:
        return hit[1]["A"]
    A = channel_matrix(spec, grid, l)
    save_cache(path, header, {"A": A})
    return A


@lru_cache(maxsize=8)
def _tensor_cached(spec, grid, cache_dir):
    if cache_dir is None:
        return gain_tensor(spec, grid)
    header = cache_header(spec, None, None, {"kind": "tensor", "radial": grid.key()})
    path = Path(cache_dir) / cache_name(header)
    hit = load_cache(path, header)
    if hit is not None:
        return GainTensor(T=hit[1]["T"], N=hit[1]["N"])
    t = gain_tensor(spec, grid)
    save_cache(path, header, {"T": t.T, "N": t.N})
    return t


@dataclass(eq=False)
class DiscreteOperator:
    """Channel matrices of L with conserved moments and kernel enforced exactly.

    For each channel, L_l = Pi (A_l - diag nu) Pi where Pi removes the
    conserved moments through mu-shaped columns.
    """

    spec: CollisionKernelSpec
    grid: RadialGrid
    channels: tuple
    nu: np.ndarray
    A: dict
    L: dict
    Pi: dict
    tensor: GainTensor | None = None

    @classmethod
    def build(cls, spec, grid, channels=(0,), nonlinear=False, cache_dir=None):
        nu = frequency_on_nodes(spec, grid)
        A, L, Pi = {}, {}, {}
        for l in channels:
            A[l] = _channel_matrix_cached(spec, grid, int(l), cache_dir)
            Pi[l] = conservative_projector(grid, int(l))
            L[l] = Pi[l] @ (A[l] - np.diag(nu)) @ Pi[l]
        tensor = _tensor_cached(spec, grid, cache_dir) if nonlinear else None
        return cls(spec, grid, tuple(channels), nu, A, L, Pi, tensor)

    def linear(self, f: dict) -> dict:
        return {l: self.L[l] @ f[l] for l in f}

    def quadratic(self, f0: np.ndarray) -> np.ndarray:
        return self.Pi[0] @ self.tensor.q(f0, f0)


# ---------------------------------------------------------------------------
# monitors
# ---------------------------------------------------------------------------

def _moments(grid: RadialGrid, f: dict):
    W = grid.volume_weights
    r = grid.nodes
    f0 = f.get(0, np.zeros(grid.n))
    f1 = f.get(1, np.zeros(grid.n))
    return float(W @ f0), float(W @ (r * f1) / 3.0), float(W @ (r * r * f0))


def _entropy(grid: RadialGrid, f: dict, n_x: int = 16) -> float:
    """H(mu + f) with nodal radial weights; nan where mu + f < 0."""
    W = grid.volume_weights
    mu = maxwellian_radial(grid.nodes)
    logmu = np.log(MU0) - 0.5 * grid.nodes ** 2
    only_iso = all(l == 0 or not np.any(v) for l, v in f.items())
    if only_iso:
        x, wx = np.array([1.0]), np.array([2.0])
    else:
        x, wx = _leggauss(n_x)
    total = 0.0
    for xi, wi in zip(x, wx):
        fx = sum(v * special.eval_legendre(l, xi) for l, v in f.items())
        F = mu + fx
        if np.any(F < -NEGATIVITY_TOL * mu.max()):
            return float("nan")
        pos = F > 1e-300
        # F ln F - mu ln mu = F ln(F/mu) + f ln mu, with 0 ln 0 = 0
        small = mu < 1e-280
        ratio = fx / np.where(small, 1.0, mu)
        lr = np.where(small, np.log(np.where(pos, F, 1.0)) - logmu, np.log1p(np.where(pos, ratio, 0.0)))
        dens = np.where(pos, F * lr, 0.0) + fx * logmu
        total += 0.5 * wi * float(W @ dens)
    return total


def _check_density(grid, f, where):
    mu = maxwellian_radial(grid.nodes)
    x, _ = _leggauss(16)
    for xi in np.concatenate([x, [1.0, -1.0]]):
        fx = sum(v * special.eval_legendre(l, xi) for l, v in f.items())
        if np.any(mu + fx < -NEGATIVITY_TOL * mu.max()):
            raise NegativeDensity(f"mu + f < 0 at {where}")


@dataclass(eq=False)
class DecaySeries:
    times: np.ndarray
    norms: dict
    mass_drift: np.ndarray
    momentum_drift: np.ndarray
    energy_drift: np.ndarray
    entropy: np.ndarray
    floors: dict = field(default_factory=dict)
    final: ChannelField | None = None
    entropy_violations: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        labels = list(self.norms)
        w.writerow(["t"] + labels + ["mass_drift", "momentum_drift", "energy_drift", "entropy"])
        for i, t in enumerate(self.times):
            w.writerow([repr(float(t))] + [repr(float(self.norms[k][i])) for k in labels]
                       + [repr(float(self.mass_drift[i])), repr(float(self.momentum_drift[i])),
                          repr(float(self.energy_drift[i])), repr(float(self.entropy[i]))])
        return buf.getvalue()

    @property
    def max_drift(self) -> float:
        return float(max(np.max(np.abs(self.mass_drift)), np.max(np.abs(self.momentum_drift)),
                         np.max(np.abs(self.energy_drift))))


def _as_channels(config: EvolutionConfig, f0) -> ChannelField:
    grid = config.grid
    if isinstance(f0, ChannelField):
        if f0.grid != grid:
            raise ConfigurationError("initial data lives on a different radial grid")
        ch = {l: np.asarray(f0.channels.get(l, np.zeros(grid.n)), dtype=float).copy()
              for l in config.channels}
        extra = set(f0.channels) - set(config.channels)
        if any(np.any(f0.channels[l]) for l in extra):
            raise ConfigurationError(f"initial data uses channels {sorted(extra)} not evolved")
        return ChannelField(grid, ch)
    if f0 is None:
        return ChannelField.zeros(grid, config.channels)
    if callable(f0):
        return ChannelField.from_function(grid, f0, config.channels)
    raise ConfigurationError("initial data must be a ChannelField, a callable or None")


def _tail_floor(grid, f: dict, weight) -> float:
    """L^2 size of the part of f beyond R, extrapolating the last element.

    The weighted profile is continued past R with the decay length of the
    outermost element (or R when it does not decay); used as the truncation
    error estimate of the monitored norms.
    """
    r = grid.nodes
    w = weight.radial(r[-2:])
    h = r[-1] - r[-2]
    tot = 0.0
    for v in f.values():
        a, b = np.abs(v[-2:]) * w
        if b == 0:
            continue
        ell = h / np.log(a / b) if a > b else r[-1]
        tot += 4.0 * np.pi * r[-1] ** 2 * b * b * 0.5 * ell
    return float(np.sqrt(tot))


def evolve(config: EvolutionConfig, f0=None, operator: DiscreteOperator | None = None) -> DecaySeries:
    """Integrate df/dt = L f (+ Q(f, f) in nonlinear mode) with classical RK4."""
    grid = config.grid
    state = _as_channels(config, f0)
    nonlinear = config.mode != "linearized"
    op = operator or DiscreteOperator.build(config.spec, grid, config.channels,
                                            nonlinear=nonlinear, cache_dir=config.cache_dir)
    f = state.channels
    if config.projects_initial:
        f = {l: op.Pi[l] @ v for l, v in f.items()}
    if nonlinear:
        _check_density(grid, f, "t = 0")

    def rhs(g):
        out = op.linear(g)
        if nonlinear:
            out[0] = out[0] + op.quadratic(g[0])
        return out

    weights = {context_label(c): _context_weight(c) for c in config.monitor_norms}
    mats = {lab: grid.mass_matrix(lambda r, w=w: w.radial(r) ** 2) for lab, w in weights.items()}

    def norms(g):
        out = {}
        for lab, M in mats.items():
            tot = sum(4.0 * np.pi / (2 * l + 1) * float(v @ M @ v) for l, v in g.items())
            out[lab] = float(np.sqrt(max(tot, 0.0)))
        return out

    m0 = _moments(grid, f)
    n_steps = int(round(config.t_end / config.dt))
    times, series, drifts, ent = [], {lab: [] for lab in weights}, [], []
    violations = 0

    def record(t, g):
        times.append(t)
        for lab, val in norms(g).items():
            series[lab].append(val)
        m = _moments(grid, g)
        # drift of mu + f relative to the moments of mu (1, 0, 3)
        drifts.append(((m[0] - m0[0]) / 1.0, m[1] - m0[1], (m[2] - m0[2]) / 3.0))
        ent.append(_entropy(grid, g))

    record(0.0, f)
    dt = config.dt
    for step in range(1, n_steps + 1):
        k1 = rhs(f)
        k2 = rhs({l: f[l] + 0.5 * dt * k1[l] for l in f})
        k3 = rhs({l: f[l] + 0.5 * dt * k2[l] for l in f})
        k4 = rhs({l: f[l] + dt * k3[l] for l in f})
        f = {l: f[l] + dt / 6.0 * (k1[l] + 2 * k2[l] + 2 * k3[l] + k4[l]) for l in f}
        if config.projects_initial:
            # moments are invariant; re-projecting removes rounding that would
            # otherwise accumulate in the kernel directions
            f = {l: op.Pi[l] @ v for l, v in f.items()}
        if not all(np.all(np.isfinite(v)) for v in f.values()):
            raise NonFinite(f"non-finite state at step {step}")
        if nonlinear:
            _check_density(grid, f, f"t = {step * dt:g}")
        if step % config.sample_every == 0 or step == n_steps:
            record(step * dt, f)
            if nonlinear and len(ent) > 1 and ent[-1] > ent[-2] + 1e-10:
                violations += 1

    floors = {}
    init = state.channels if not config.projects_initial else {l: op.Pi[l] @ v for l, v in state.channels.items()}
    for lab, w in weights.items():
        floors[lab] = 1e3 * _tail_floor(grid, init, w)
    dr = np.array(drifts) if drifts else np.zeros((0, 3))
    return DecaySeries(times=np.array(times), norms={k: np.array(v) for k, v in series.items()},
                       mass_drift=dr[:, 0], momentum_drift=dr[:, 1], energy_drift=dr[:, 2],
                       entropy=np.array(ent), floors=floors, final=ChannelField(grid, f),
                       entropy_violations=violations)


# ---------------------------------------------------------------------------
# Picard iteration for the mild form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionReport:
    T: float
    ratios: tuple
    contracted: bool
    sup_weighted: float
    initial_sup_weighted: float
    bound_holds: bool
    tried: tuple

    def to_dict(self) -> dict:
        return {"T": self.T, "ratios": list(self.ratios), "contracted": self.contracted,
                "sup_weighted": self.sup_weighted, "initial_sup_weighted": self.initial_sup_weighted,
                "bound_holds": self.bound_holds, "tried": [list(t) for t in self.tried]}


def _exp_trapezoid_coeffs(nu, dt):
    z = nu * dt
    e = np.exp(-z)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi1 = np.where(z > 1e-8, (1.0 - e) / z, 1.0 - 0.5 * z)
        phi2 = np.where(z > 1e-8, (1.0 - e * (1.0 + z)) / (z * z), 0.5 - z / 3.0)
    a = dt * phi2                # weight of N at the left end
    b = dt * (phi1 - phi2)       # weight of N at the right end
    return e, a, b


def _picard_window(op, g0, w, T, dt, n_iter):
    """Run n_iter Picard sweeps on [0, T]; return (iterates, difference sups)."""
    M = max(1, int(round(T / dt)))
    dt = T / M
    nu = op.nu
    e, a, b = _exp_trapezoid_coeffs(nu, dt)
    Kk = (w[:, None] * (op.L[0] + np.diag(nu))) / w[None, :]
    prev = np.repeat(g0[None, :], M + 1, axis=0)
    diffs = []
    for _ in range(n_iter):
        f_over_w = prev / w
        N = prev @ Kk.T + np.stack([w * op.quadratic(x) for x in f_over_w])
        nxt = np.empty_like(prev)
        nxt[0] = g0
        for m in range(M):
            nxt[m + 1] = e * nxt[m] + a * N[m] + b * N[m + 1]
        diffs.append(float(np.max(np.abs(nxt - prev))))
        if not np.all(np.isfinite(nxt)):
            diffs[-1] = float("inf")
            prev = nxt
            break
        prev = nxt
    return prev, diffs


def picard_iterate(config: EvolutionConfig, f0, k: float, n_iter: int = 6,
                   operator: DiscreteOperator | None = None):
    """Picard iteration of the weighted mild form on the isotropic channel.

    g = <v>^k f solves g(t) = e^{-nu t} g0 + int_0^t e^{-nu (t-s)} (K_k g + Gamma_k(g, g))(s) ds.
    The window T is the largest of t_end, t_end/2, ... (not below dt) on which
    every sweep shrinks sup_t |g^{n+1} - g^n| by at least 1/2.

    Returns
    -------
    iterates : (M + 1, n) array
        Final iterate of g on the time grid of the reported window.
    report : ContractionReport
    """
    check_weight(config.spec, k)
    grid = config.grid
    state = _as_channels(config, f0)
    if any(np.any(v) for l, v in state.channels.items() if l != 0):
        raise ConfigurationError("Picard iteration is implemented for isotropic data")
    op = operator or DiscreteOperator.build(config.spec, grid, (0,), nonlinear=True,
                                            cache_dir=config.cache_dir)
    f = state.channels[0]
    if config.projects_initial:
        f = op.Pi[0] @ f
    w = (1.0 + grid.nodes ** 2) ** (0.5 * k)
    g0 = w * f
    sup0 = float(np.max(np.abs(g0)))
    tried = []
    T = config.t_end
    while True:
        it, diffs = _picard_window(op, g0, w, T, config.dt, n_iter)
        ratios = tuple(0.0 if d0 == 0 else d1 / d0 for d0, d1 in zip(diffs[:-1], diffs[1:]))
        ok = all(r <= 0.5 for r in ratios) and np.all(np.isfinite(diffs))
        tried.append((T, max(ratios) if ratios else 0.0))
        if ok:
            sup = float(np.max(np.abs(it)))
            rep = ContractionReport(T=T, ratios=ratios, contracted=True, sup_weighted=sup,
                                    initial_sup_weighted=sup0, bound_holds=sup <= 2.0 * sup0 + 1e-300,
                                    tried=tuple(tried))
            return it, rep
        if T / 2.0 < config.dt * (1 - 1e-12):
            raise NoContraction(f"no contraction down to T = {T:g}")
        T = T / 2.0
