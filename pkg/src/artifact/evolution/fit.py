"""Decay-rate fits in linearizing coordinates."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigurationError, DegenerateWindow, InsufficientData

MODELS = ("exponential", "algebraic", "stretched")
MIN_SAMPLES = 20
TRANSIENT_FRACTION = 0.2


@dataclass(frozen=True)
class RateFit:
    """Fitted decay parameter.

    ``parameter`` is the rate lambda for ``exponential`` (norm ~ e^{-lambda t}),
    the slope s for ``algebraic`` (norm ~ (1+t)^{-s}) and the stretch exponent q
    for ``stretched`` (norm ~ e^{-c t^q}).
    """

    model: str
    parameter: float
    intercept: float
    window: tuple
    r2: float
    samples: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def _linear_fit(x, y):
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx <= 0 or not np.isfinite(sxx):
        raise DegenerateWindow("regressor has no spread on the fit window")
    slope = np.sum((x - xm) * (y - ym)) / sxx
    icpt = ym - slope * xm
    ss_res = np.sum((y - icpt - slope * x) ** 2)
    ss_tot = np.sum((y - ym) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(icpt), float(r2)


def fit_decay_arrays(times, values, model: str, floor: float = 0.0,
                     transient: float = TRANSIENT_FRACTION, t_max: float | None = None) -> RateFit:
    """Fit a decay model to (times, values).

    The first ``transient`` fraction of samples and values at or below
    ``floor`` are dropped before the regression.
    """
    if model not in MODELS:
        raise ConfigurationError(f"unknown decay model {model!r}")
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape:
        raise ConfigurationError("times and values differ in length")
    start = int(np.ceil(transient * len(t)))
    keep = np.zeros(len(t), dtype=bool)
    keep[start:] = True
    keep &= np.isfinite(y) & (y > floor) & (y > 0)
    if t_max is not None:
        keep &= t <= t_max
    if model == "stretched":
        y0 = y[0]
        keep &= (t > 0) & (y < y0)
    if np.count_nonzero(keep) < MIN_SAMPLES:
        raise InsufficientData(f"{np.count_nonzero(keep)} usable samples, need {MIN_SAMPLES}")
    tk, yk = t[keep], y[keep]
    if model == "exponential":
        slope, icpt, r2 = _linear_fit(tk, np.log(yk))
        param = -slope
    elif model == "algebraic":
        slope, icpt, r2 = _linear_fit(np.log1p(tk), np.log(yk))
        param = -slope
    else:
        z = np.log(-np.log(yk / y[0]))
        if not np.all(np.isfinite(z)):
            raise DegenerateWindow("stretched coordinates are not finite")
        slope, icpt, r2 = _linear_fit(np.log(tk), z)
        param = slope
    return RateFit(model=model, parameter=float(param), intercept=icpt,
                   window=(float(tk[0]), float(tk[-1])), r2=r2, samples=int(len(tk)))


def fit_decay(series, model: str, context: str | None = None, **kw) -> RateFit:
    """Fit one monitored norm of a DecaySeries."""
    if context is None:
        context = next(iter(series.norms))
    if context not in series.norms:
        raise ConfigurationError(f"series has no norm {context!r}")
    return fit_decay_arrays(series.times, series.norms[context], model,
                            floor=series.floors.get(context, 0.0), **kw)


def regime_model(gamma: float, exponential_weight: bool = False) -> str:
    """Decay model expected for the kernel exponent and weight type."""
    if gamma >= 0:
        return "exponential"
    return "stretched" if exponential_weight else "algebraic"
