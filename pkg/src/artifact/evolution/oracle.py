"""Spectrum of the linearized operator for Maxwell molecules (gamma = 0)."""

from __future__ import annotations

import numpy as np
from scipy import special

from ..kernel_geometry import CollisionKernelSpec
from ..quadrature import gauss_interval


def maxwell_eigenvalue(spec: CollisionKernelSpec, n: int, l: int, n_quad: int = 200) -> float:
    """Eigenvalue lambda_{n l} of L for B = b(cos theta).

    lambda_{nl} = 2 pi int b(c) [C^{2n+l} P_l(C) + S^{2n+l} P_l(S) - 1 - delta_{n0} delta_{l0}] dc
    with C = cos(theta/2), S = sin(theta/2) and c = cos(theta).  The
    eigenfunctions are mu |v|^l L_n^{(l+1/2)}(|v|^2/2) Y_lm.
    """
    c, w = gauss_interval(n_quad, *spec.c_interval)
    C = np.sqrt(0.5 * (1.0 + c))
    S = np.sqrt(0.5 * (1.0 - c))
    m = 2 * n + l
    val = (C ** m * special.eval_legendre(l, C) + S ** m * special.eval_legendre(l, S) - 1.0
           - (1.0 if n == 0 and l == 0 else 0.0))
    return float(2.0 * np.pi * np.dot(w, spec.b(c) * val))


def spectral_gap(spec: CollisionKernelSpec, n_max: int = 6, l_max: int = 6) -> tuple[float, tuple]:
    """Smallest nonzero |lambda_{nl}| and its (n, l)."""
    best = (np.inf, None)
    for n in range(n_max + 1):
        for l in range(l_max + 1):
            lam = maxwell_eigenvalue(spec, n, l)
            if abs(lam) > 1e-12 and abs(lam) < best[0]:
                best = (abs(lam), (n, l))
    return best
