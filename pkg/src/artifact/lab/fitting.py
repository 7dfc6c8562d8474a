"""Envelope fits and claim checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

RATIO_TOL = 1e-6


@dataclass
class EnvelopeFit:
    """Nonnegative envelope sum_j c_j phi_j dominating the sampled LHS.

    ``constants`` come from NNLS on the relative residual
    sum_j c_j phi_j(x_i) / lhs_i - 1, reweighted so that rows the envelope
    undershoots count more (this pulls the fit toward an upper envelope).
    Dominance is then enforced either by rescaling all constants or, when a
    ``free`` column is named, by raising that constant alone.  ``residual``
    is the RMS relative residual before dominance and ``inflation`` the
    factor (rescaling) or the amount (free column) that was applied.
    """

    constants: np.ndarray
    residual: float
    inflation: float
    envelope: np.ndarray
    ratio: np.ndarray

    @property
    def worst(self) -> int:
        return int(np.nanargmax(self.ratio)) if self.ratio.size else -1

    @property
    def max_ratio(self) -> float:
        return float(np.nanmax(self.ratio)) if self.ratio.size else 0.0

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.constants)) and np.all(np.isfinite(self.ratio)))


def _weighted_nnls(A, w, m):
    sw = np.sqrt(w)[:, None]
    B = A * sw
    big = np.max(np.abs(B), axis=0)
    big = np.where(big > 0, big, 1.0)
    scale = big * np.linalg.norm(B / big, axis=0)  # no overflow on huge columns
    scale = np.where(scale > 0, scale, 1.0)
    sol, _ = nnls(B / scale, sw[:, 0], maxiter=50 * m)
    return sol / scale


def fit_envelope(lhs, basis, free: int | None = None, reweight: int = 30,
                 fit_rows=None) -> EnvelopeFit:
    """Fit nonnegative constants for ``lhs <= basis @ c`` (basis: samples x terms).

    ``fit_rows`` restricts the NNLS stage to a subset of samples (e.g. the
    large-|v| tail, where the leading term of a two-term envelope is
    identified); dominance is always enforced on every sample.
    """
    lhs = np.asarray(lhs, dtype=float)
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.shape[0] != lhs.shape[0]:
        basis = basis.T
    m = basis.shape[1]
    if free is not None and not -m <= free < m:
        free = None
    use = lhs > 0
    if fit_rows is not None and np.any(use & np.asarray(fit_rows, dtype=bool)):
        use = use & np.asarray(fit_rows, dtype=bool)
    if not np.any(use):
        c = np.zeros(m)
        return EnvelopeFit(c, 0.0, 0.0, basis @ c, np.zeros_like(lhs))
    A = basis[use] / lhs[use, None]
    if fit_rows is not None and free is not None:
        # on the tail window only the leading terms are identifiable
        A = A.copy()
        A[:, free] = 0.0
    w = np.ones(int(use.sum()))
    c = _weighted_nnls(A, w, m)
    for _ in range(reweight):
        fit = A @ c
        short = np.where(fit > 0, 1.0 / np.where(fit > 0, fit, 1.0), np.inf)
        if np.all(short <= 1.0 + RATIO_TOL) or m == 1:
            break
        w = w * np.clip(short, 1.0, 1e3) ** 2
        w /= w.max()
        c = _weighted_nnls(A, w, m)
    res = float(np.sqrt(np.mean((A @ c - 1.0) ** 2)))
    env = basis @ c
    deficit = lhs - env
    inflation = 0.0
    if np.any(deficit > 0):
        c = c.copy()
        if free is not None and np.all(basis[deficit > 0, free] > 0):
            need = deficit[deficit > 0] / basis[deficit > 0, free]
            inflation = float(np.max(need)) * (1.0 + RATIO_TOL / 10)
            c[free] += inflation
        else:
            if not np.any(c > 0):
                c = _weighted_nnls(A, np.ones_like(w), m)
                if not np.any(c > 0):
                    c = np.ones(m)
            env = basis @ c
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(env > 0, lhs / env, np.where(lhs > 0, np.inf, 0.0))
            inflation = float(np.max(r)) * (1.0 + RATIO_TOL / 10)
            c = c * inflation
        env = basis @ c
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(env > 0, lhs / env, np.where(lhs > 0, np.inf, 0.0))
    return EnvelopeFit(c, res, inflation, env, ratio)


def power_law_exponent(x, y) -> tuple[float, float]:
    """Least-squares slope of log y against log x, with R^2."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    if len(lx) < 2 or not np.all(np.isfinite(ly)):
        return float("nan"), float("nan")
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ np.array([slope, icpt])
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum((ly - pred) ** 2) / ss if ss > 0 else 1.0
    return float(slope), float(r2)


def exponent_matches(fitted: float, predicted: float, tolerance: float) -> bool:
    if not np.isfinite(fitted):
        return False
    if predicted == 0:
        return abs(fitted) <= tolerance
    return abs(fitted - predicted) <= tolerance * abs(predicted)
