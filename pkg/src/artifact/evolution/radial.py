"""Radial/Legendre channel discretization of the homogeneous problem.

A perturbation is written f(v) = sum_l f_l(|v|) P_l(v_1 / |v|) with each
f_l piecewise linear on a radial grid.  Rotation invariance of L makes each
channel evolve on its own: (L f)_l = A_l f_l - nu f_l, where A_l is the
collocation matrix of the compact part at the nodes.  Only the isotropic
channel is used for the quadratic term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from ..collision import _orthonormal_frames, _rho_rule, _x_rule, nu_radial, plane_profile
from ..errors import ConfigurationError
from ..kernel_geometry import CollisionKernelSpec
from ..quadrature import _leggauss, gauss_interval, jacobi_radial
from ..weights import MU0, maxwellian_radial


@dataclass(frozen=True)
class RadialGrid:
    """Nodes 0 = r_0 < ... < r_{n-1} = R carrying hat functions.

    ``stretch > 0`` places nodes at R sinh(stretch x)/sinh(stretch) for
    uniform x in [0, 1], which keeps resolution near the origin on long boxes.
    """

    R: float = 8.0
    n: int = 65
    stretch: float = 0.0

    def __post_init__(self):
        if self.n < 4 or self.R <= 0:
            raise ConfigurationError("radial grid needs R > 0 and at least 4 nodes")

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.n)
        if self.stretch > 0:
            return self.R * np.sinh(self.stretch * x) / np.sinh(self.stretch)
        return self.R * x

    def hat_weights(self, r):
        """(index, weight) pairs so that f(r) = sum w f[idx]; zero beyond R."""
        r = np.asarray(r, dtype=float)
        nodes = self.nodes
        j = np.clip(np.searchsorted(nodes, r, side="right") - 1, 0, self.n - 2)
        t = (r - nodes[j]) / (nodes[j + 1] - nodes[j])
        inside = (r >= 0) & (r <= self.R)
        w0 = np.where(inside, 1.0 - t, 0.0)
        w1 = np.where(inside, t, 0.0)
        return j, w0, w1

    def interpolate(self, values, r):
        j, w0, w1 = self.hat_weights(r)
        values = np.asarray(values)
        return w0 * values[..., j] + w1 * values[..., j + 1]

    def element_rule(self, n_per: int = 6):
        """GL nodes on every element, with the element index of each node."""
        a, b = self.nodes[:-1], self.nodes[1:]
        x, w = gauss_interval(n_per, a, b)
        return x, w

    def mass_matrix(self, weight_sq=None, n_per: int = 6) -> np.ndarray:
        """M_ij = int_0^R r^2 w(r)^2 phi_i phi_j dr for the hat basis."""
        x, w = self.element_rule(n_per)
        a = self.nodes[:-1, None]
        h = (self.nodes[1:] - self.nodes[:-1])[:, None]
        t = (x - a) / h
        base = w * x * x * (1.0 if weight_sq is None else weight_sq(x))
        n = self.n
        M = np.zeros((n, n))
        idx = np.arange(n - 1)
        M[idx, idx] += np.sum(base * (1 - t) ** 2, axis=1)
        M[idx + 1, idx + 1] += np.sum(base * t * t, axis=1)
        off = np.sum(base * t * (1 - t), axis=1)
        M[idx, idx + 1] += off
        M[idx + 1, idx] += off
        return M

    @cached_property
    def volume_weights(self) -> np.ndarray:
        """W_j = 4 pi int r^2 phi_j dr: exact integrals of isotropic hat fields."""
        return 4.0 * np.pi * self.mass_matrix().sum(axis=1)

    def key(self) -> dict:
        return {"R": float(self.R), "n": int(self.n), "stretch": float(self.stretch)}


@dataclass(eq=False)
class ChannelField:
    """f(v) = sum_l f_l(|v|) P_l(v_1 / |v|) on a RadialGrid."""

    grid: RadialGrid
    channels: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls, grid: RadialGrid, ls=(0,)) -> "ChannelField":
        return cls(grid, {l: np.zeros(grid.n) for l in ls})

    @classmethod
    def from_function(cls, grid: RadialGrid, fn, ls=(0, 1, 2), n_x: int = 32) -> "ChannelField":
        """Legendre projection of a callable f(v) along the e_1 axis.

        The azimuthal average about e_1 is taken over 16 angles, so fields
        that are not axisymmetric are replaced by their axisymmetric part.
        """
        x, wx = _leggauss(n_x)
        phi = 2.0 * np.pi * (np.arange(16) + 0.5) / 16
        r = grid.nodes
        sx = np.sqrt(1.0 - x * x)
        pts = np.stack([
            r[:, None, None] * x[None, :, None] * np.ones((1, 1, 16)),
            r[:, None, None] * (sx[:, None] * np.cos(phi)[None, :])[None],
            r[:, None, None] * (sx[:, None] * np.sin(phi)[None, :])[None],
        ], axis=-1)
        vals = np.asarray(fn(pts), dtype=float).mean(axis=-1)
        out = {}
        for l in ls:
            pl = special.eval_legendre(l, x)
            out[l] = 0.5 * (2 * l + 1) * vals @ (wx * pl)
            if l > 0:
                out[l][0] = 0.0
        return cls(grid, out)

    def copy(self) -> "ChannelField":
        return ChannelField(self.grid, {l: v.copy() for l, v in self.channels.items()})

    def at(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        r = np.linalg.norm(points, axis=-1)
        x = np.where(r > 0, points[..., 0] / np.where(r > 0, r, 1.0), 1.0)
        out = np.zeros(r.shape)
        for l, vals in self.channels.items():
            out += self.grid.interpolate(vals, r) * special.eval_legendre(l, x)
        return out

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.channels[l] for l in sorted(self.channels)])

    def with_vector(self, vec) -> "ChannelField":
        n = self.grid.n
        return ChannelField(self.grid, {l: np.array(vec[i * n:(i + 1) * n])
                                        for i, l in enumerate(sorted(self.channels))})


def weighted_norm(field: ChannelField, weight_sq=None) -> float:
    """L^2 norm with weight w(|v|): sum_l 4 pi/(2l+1) f_l^T M_w f_l, square-rooted."""
    M = field.grid.mass_matrix(weight_sq)
    tot = 0.0
    for l, f in field.channels.items():
        tot += 4.0 * np.pi / (2 * l + 1) * float(f @ M @ f)
    return float(np.sqrt(max(tot, 0.0)))


def sup_norm(field: ChannelField, weight=None) -> float:
    """sup over |v| at the nodes of sum_l |f_l| w, an upper bound of the 3-D sup."""
    w = 1.0 if weight is None else weight(field.grid.nodes)
    acc = np.zeros(field.grid.n)
    for f in field.channels.values():
        acc += np.abs(f)
    return float(np.max(acc * w))


# ---------------------------------------------------------------------------
# linear channel matrices
# ---------------------------------------------------------------------------

def channel_matrix(spec: CollisionKernelSpec, grid: RadialGrid, l: int,
                   n_rho_seg: int = 8, n_x_seg: int = 8, n_t_seg: int = 8) -> np.ndarray:
    """Collocation matrix of the compact part K in channel l.

    Row i is int l(v_i, v') phi_j(|v'|) P_l(cos angle(v', e_1)) dv' with
    v_i = r_i e_1, where l = l_2 - l_1 is the Carleman kernel of K.
    """
    n = grid.n
    A = np.zeros((n, n))
    bnorm = spec.angular_norm()
    for i, ri in enumerate(grid.nodes):
        rho, wr = _rho_rule(ri, ri + grid.R, n_rho_seg)
        x, wx = _x_rule(ri, n_x_seg)
        R, X = np.meshgrid(rho, x, indexing="ij")
        p = ri * X
        s = ri * np.sqrt(1.0 - X * X)
        G = plane_profile(spec, R, s, n_t_seg)
        l2 = 4.0 / R * MU0 * np.exp(-0.5 * p * p) * G
        l1 = maxwellian_radial(ri) * bnorm * R ** spec.gamma
        rp = np.sqrt(ri * ri + 2.0 * ri * R * X + R * R)
        cosang = np.where(rp > 0, (ri + R * X) / np.where(rp > 0, rp, 1.0), 1.0)
        w = 2.0 * np.pi * (wr * rho * rho)[:, None] * wx[None, :]
        val = w * (l2 - l1) * special.eval_legendre(l, cosang)
        j, w0, w1 = grid.hat_weights(rp)
        A[i] = (np.bincount(j.ravel(), (val * w0).ravel(), minlength=n)
                + np.bincount(j.ravel() + 1, (val * w1).ravel(), minlength=n))[:n]
    return A


def frequency_on_nodes(spec: CollisionKernelSpec, grid: RadialGrid) -> np.ndarray:
    return nu_radial(spec, grid.nodes)


def conserved_rows(grid: RadialGrid, l: int) -> np.ndarray:
    """Rows C with C f_l = conserved moments carried by channel l."""
    W = grid.volume_weights
    r = grid.nodes
    if l == 0:
        return np.stack([W, W * r * r])
    if l == 1:
        return np.stack([W * r / 3.0])
    return np.zeros((0, grid.n))


def kernel_columns(grid: RadialGrid, l: int) -> np.ndarray:
    """Nodal values of the collision invariants times mu in channel l."""
    r = grid.nodes
    mu = maxwellian_radial(r)
    if l == 0:
        return np.stack([mu, r * r * mu], axis=1)
    if l == 1:
        return (r * mu)[:, None]
    return np.zeros((grid.n, 0))


def conservative_projector(grid: RadialGrid, l: int) -> np.ndarray:
    """Pi = I - M (C M)^-1 C: removes conserved moments with mu-shaped corrections."""
    C = conserved_rows(grid, l)
    if C.shape[0] == 0:
        return np.eye(grid.n)
    M = kernel_columns(grid, l)
    return np.eye(grid.n) - M @ np.linalg.solve(C @ M, C)


# ---------------------------------------------------------------------------
# quadratic term on the isotropic channel
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class GainTensor:
    """Q(f, g)(r_i) = sum_jk T_ijk g_j f_k - g_i sum_k N_ik f_k for isotropic hat fields."""

    T: np.ndarray
    N: np.ndarray

    def q(self, f, g) -> np.ndarray:
        gain = np.einsum("ijk,j,k->i", self.T, g, f)
        return gain - g * (self.N @ f)

    def q_split(self, f, g):
        return np.einsum("ijk,j,k->i", self.T, g, f), g * (self.N @ f)


def gain_tensor(spec: CollisionKernelSpec, grid: RadialGrid, n_u: int = 48,
                n_beta: int = 24, n_c: int = 8, n_psi: int = 16) -> GainTensor:
    """Assemble the quadratic-term tensors by sigma-quadrature at v_i = r_i e_3.

    v* = v - u with u = |u|(sin b, 0, cos b) (the azimuth of u is trivial for
    isotropic data), sigma is parametrized about u, and the hats are read at
    |v'| (second argument) and |v*'| (first argument).
    """
    n = grid.n
    T = np.zeros((n, n, n))
    Nmat = np.zeros((n, n))
    cb, wb = _leggauss(n_beta)
    c_lo, c_hi = spec.c_interval
    cc, wc = gauss_interval(n_c, c_lo, c_hi)
    psi = 2.0 * np.pi * (np.arange(n_psi) + 0.5) / n_psi
    sb = np.sqrt(1.0 - cb * cb)
    d = np.stack([sb, np.zeros_like(sb), cb], axis=1)          # (n_beta, 3)
    e1, e2 = _orthonormal_frames(d)
    C, P = np.meshgrid(cc, psi, indexing="ij")
    C = C.ravel()
    S = np.sqrt(1.0 - C * C)
    wsig = (np.outer(wc, np.full(n_psi, 2.0 * np.pi / n_psi)).ravel() * spec.b(C))
    sig = (d[:, None, :] * C[None, :, None]
           + (S * np.cos(P.ravel()))[None, :, None] * e1[:, None, :]
           + (S * np.sin(P.ravel()))[None, :, None] * e2[:, None, :])   # (n_beta, n_s, 3)
    for i, ri in enumerate(grid.nodes):
        v = np.array([0.0, 0.0, ri])
        ur, wu = jacobi_radial(n_u, ri + grid.R, 2.0 + spec.gamma)
        u = ur[:, None, None] * d[None, :, :]                  # (n_u, n_beta, 3)
        w_pair = (wu[:, None] * wb[None, :]) * 2.0 * np.pi     # trivial azimuth of u
        # loss
        rs = np.linalg.norm(v - u, axis=-1)
        j, w0, w1 = grid.hat_weights(rs)
        lw = w_pair * np.sum(wsig)
        Nmat[i] = (np.bincount(j.ravel(), (lw * w0).ravel(), minlength=n)
                   + np.bincount(j.ravel() + 1, (lw * w1).ravel(), minlength=n))[:n]
        # gain
        center = v - 0.5 * u
        half = 0.5 * ur[:, None, None, None] * sig[None]
        rp = np.linalg.norm(center[:, :, None, :] + half, axis=-1)
        rsp = np.linalg.norm(center[:, :, None, :] - half, axis=-1)
        ww = w_pair[:, :, None] * wsig[None, None, :]
        jp, a0, a1 = grid.hat_weights(rp)
        jk, b0, b1 = grid.hat_weights(rsp)
        flat = np.zeros(n * n)
        for dj, aw in ((0, a0), (1, a1)):
            for dk, bw in ((0, b0), (1, b1)):
                idx = (jp + dj) * n + (jk + dk)
                flat += np.bincount(idx.ravel(), (ww * aw * bw).ravel(), minlength=n * n)[:n * n]
        T[i] = flat.reshape(n, n)
    return GainTensor(T=T, N=Nmat)
