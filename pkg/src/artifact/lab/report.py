"""Fit reports for registry entries, plus JSON and CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import UnknownEntry
from ..grids import MonteCarloPlan
from ..kernel_geometry import CollisionKernelSpec
from .fitting import RATIO_TOL, exponent_matches, fit_envelope, power_law_exponent
from .identities import IDENTITIES, IdentityCheck, run_identity
from .registry import REGISTRY, TIER_LEVELS, Claim, Resolution, feasible_p

CSV_HEADER = ("entry_id", "param", "value", "lhs", "rhs", "ratio")
TIER_SAMPLES = {"smoke": 10_000, "standard": 100_000, "deep": 1_000_000}


def sweep_label(params: dict) -> str:
    return ",".join(f"{k}={_fmt(v)}" for k, v in params.items())


def _fmt(v):
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


@dataclass
class SweepFit:
    params: dict
    label: str
    constants: list
    residual: float
    inflation: float
    max_ratio: float
    worst_probe: float
    finite: bool
    extras: dict = field(default_factory=dict)

    @property
    def dominated(self) -> bool:
        return self.finite and self.max_ratio <= 1.0 + RATIO_TOL


@dataclass
class ClaimResult:
    kind: str
    note: str
    passed: bool
    details: dict


@dataclass
class FitReport:
    entry_id: str
    title: str
    anchor: str
    rhs_form: str
    sweeps: list
    claims: list
    passed: bool
    level: int
    reran: bool = False
    diagnostics: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    @property
    def constants(self) -> dict:
        return {s.label: s.constants for s in self.sweeps}

    @property
    def residual(self) -> float:
        return max((s.residual for s in self.sweeps), default=0.0)

    @property
    def worst_ratio(self) -> float:
        return max((s.max_ratio for s in self.sweeps), default=0.0)

    def to_dict(self) -> dict:
        return {
            "id": self.entry_id,
            "title": self.title,
            "anchor": self.anchor,
            "rhs_form": self.rhs_form,
            "constants": self.constants,
            "residual": self.residual,
            "pass": self.passed,
            "diagnostics": dict(
                self.diagnostics,
                level=self.level,
                reran=self.reran,
                worst_ratio=self.worst_ratio,
                sweeps=[{"params": s.params, "constants": s.constants, "residual": s.residual,
                         "inflation": s.inflation, "max_ratio": s.max_ratio,
                         "worst_probe": s.worst_probe, "dominated": s.dominated,
                         "extras": _plain_extras(s.extras)} for s in self.sweeps],
                claims=[{"kind": c.kind, "note": c.note, "pass": c.passed, **c.details}
                        for c in self.claims],
            ),
        }


def _plain_extras(extras: dict) -> dict:
    keep = {}
    for k, v in extras.items():
        if k in ("estimate", "oracle", "family", "pairs"):
            continue
        keep[k] = v
    return keep


# ---------------------------------------------------------------------------
# claims
# ---------------------------------------------------------------------------

def _groups(sweeps, parameter):
    """Sweep fits grouped by every parameter except ``parameter``, in sweep order."""
    out: dict = {}
    for s in sweeps:
        if parameter not in s.params:
            continue
        key = tuple((k, v) for k, v in s.params.items() if k != parameter)
        out.setdefault(key, []).append(s)
    return out


def _claim_power(claim: Claim, sweeps):
    details = {"predicted_exponent": claim.exponent, "groups": []}
    ok = True
    for key, group in _groups(sweeps, claim.parameter).items():
        x = np.array([s.params[claim.parameter] for s in group], dtype=float)
        c = np.array([s.constants[claim.target] for s in group], dtype=float)
        slope, r2 = power_law_exponent(x, c)
        match = exponent_matches(slope, claim.exponent, claim.tolerance)
        scaled = c * x ** (-claim.exponent)
        mean = float(np.mean(scaled))
        details["groups"].append({
            "fixed": dict(key), "fitted_exponent": slope, "r2": r2, "match": match,
            "consecutive_ratios": (c[1:] / c[:-1]).tolist(),
            "normalized_constants": scaled.tolist(),
            "normalized_spread": float(np.max(np.abs(scaled / mean - 1.0))) if mean > 0 else float("inf"),
        })
        ok &= match
    return ok, details


def _claim_tail(claim: Claim, sweeps):
    rows = []
    ok = True
    for s in sweeps:
        fitted, pred = s.extras.get("tail_exponent"), s.extras.get("predicted_exponent")
        match = exponent_matches(fitted, pred, claim.tolerance)
        rows.append({"params": s.params, "fitted_exponent": fitted, "predicted_exponent": pred,
                     "match": match, "decays_at_least_as_fast": bool(fitted <= pred)})
        ok &= match
    return ok, {"sweeps": rows}


def _claim_decreasing(claim: Claim, sweeps):
    out = []
    ok = True
    for key, group in _groups(sweeps, claim.parameter).items():
        c = [s.constants[claim.target] for s in group]
        dec = all(b < a for a, b in zip(c, c[1:]))
        out.append({"fixed": dict(key), "constants": c, "strictly_decreasing": dec})
        ok &= dec
    return ok, {"groups": out}


def _claim_oracle(claim: Claim, sweeps):
    worst = 0.0
    for s in sweeps:
        if "oracle" not in s.extras:
            continue
        est = np.asarray(s.extras["estimate"], dtype=float)
        ora = np.asarray(s.extras["oracle"], dtype=float)
        worst = max(worst, float(np.max(np.abs(est - ora) / np.abs(ora))))
    return worst <= claim.tolerance, {"max_relative_error": worst, "tolerance": claim.tolerance}


def _claim_at_most(claim: Claim, sweeps):
    c = [s.constants[claim.target] for s in sweeps]
    return bool(max(c) <= claim.bound * (1.0 + RATIO_TOL)), {"max_constant": max(c), "bound": claim.bound}


def _claim_below(claim: Claim, sweeps):
    margins = [min(s.extras.get("margin", [0.0])) for s in sweeps]
    return bool(min(margins) > 0), {"min_margin": min(margins)}


_CLAIMS = {"power": _claim_power, "tail": _claim_tail, "decreasing": _claim_decreasing,
           "oracle": _claim_oracle, "at_most": _claim_at_most, "below": _claim_below}


# ---------------------------------------------------------------------------
# probing
# ---------------------------------------------------------------------------

def _resolution(resolution) -> Resolution:
    if isinstance(resolution, Resolution):
        return resolution
    if isinstance(resolution, str):
        return Resolution(TIER_LEVELS[resolution])
    return Resolution(int(resolution))


def _probe_once(entry, sweep, res: Resolution, seed: int) -> FitReport:
    fits, rows = [], []
    for params in sweep:
        sample = entry.evaluator(params, res, seed)
        rows_mask = None
        tail = entry.tail_radius(params)
        if tail is not None:
            rows_mask = np.asarray(sample.probes) >= tail
        fit = fit_envelope(sample.lhs, sample.basis, entry.free, fit_rows=rows_mask)
        label = sweep_label(params)
        w = fit.worst
        fits.append(SweepFit(params=dict(params), label=label, constants=fit.constants.tolist(),
                             residual=fit.residual, inflation=fit.inflation, max_ratio=fit.max_ratio,
                             worst_probe=float(sample.probes[w]) if w >= 0 else float("nan"),
                             finite=fit.finite, extras=sample.extras))
        for x, l, e, r in zip(sample.probes, sample.lhs, fit.envelope, fit.ratio):
            rows.append((entry.id, label, float(x), float(l), float(e), float(r)))
    claims = []
    for claim in entry.claims:
        ok, details = _CLAIMS[claim.kind](claim, fits)
        claims.append(ClaimResult(claim.kind, claim.note, bool(ok), details))
    diagnostics = {"tail_fit_from": [entry.tail_radius(p) for p in sweep] if entry.tail_fit else None,
                   "free_constant": entry.free}
    if "p_table_gammas" in entry.extra:
        diagnostics["p_feasibility"] = {f"{g:g}": feasible_p(g) for g in entry.extra["p_table_gammas"]}
    passed = all(s.dominated for s in fits) and all(c.passed for c in claims)
    return FitReport(entry.id, entry.title, entry.anchor, entry.rhs_form, fits, claims, passed,
                     res.level, diagnostics=diagnostics, rows=rows)


def probe_bound(entry_id: str, sweep_override=None, resolution="smoke", seed: int = 0,
                rerun: bool = True) -> FitReport:
    """Evaluate one registry entry over its sweep and fit the envelope.

    A failure at level 1 is repeated once at level 2 before it is reported.
    """
    if entry_id not in REGISTRY:
        raise UnknownEntry(f"unknown registry entry {entry_id!r}")
    entry = REGISTRY[entry_id]
    sweep = tuple(dict(p) for p in (sweep_override if sweep_override is not None else entry.sweep))
    for params in sweep:
        entry.check(params)
    res = _resolution(resolution)
    report = _probe_once(entry, sweep, res, seed)
    if rerun and not report.passed and res.level == 1:
        report = _probe_once(entry, sweep, Resolution(2), seed)
        report.reran = True
    return report


def _probe_job(args):
    entry_id, tier, seed = args
    return probe_bound(entry_id, resolution=tier, seed=seed)


@dataclass
class RegistryReport:
    run_id: str
    seed: int
    tier: str
    entries: list
    identities: list

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries) and all(i.passed for i in self.identities)

    def to_dict(self) -> dict:
        return {"run_id": self.run_id, "seed": self.seed, "resolution_tier": self.tier,
                "entries": [e.to_dict() for e in self.entries],
                "identities": [i.to_dict() for i in self.identities]}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        return rows_to_csv(r for e in self.entries for r in e.rows)


def registry_report(ids=None, tier: str = "smoke", seed: int = 0, run_id: str = "",
                    identities=None, gammas=(0.0, -1.0), workers: int = 1,
                    samples: int | None = None, kernel: dict | None = None) -> RegistryReport:
    """Probe a subset of entries (all when ``ids`` is None), ordered by id.

    ``identities`` lists identity ids to run at the tier's sample count for
    each gamma in ``gammas``; None means all identities when ``ids`` is None
    and none otherwise.  ``samples`` overrides the tier's Monte Carlo size and
    ``kernel`` ({"b_profile", "K"}) the angular profile of the identities.
    """
    if ids is None:
        ids = sorted(REGISTRY)
        if identities is None:
            identities = sorted(IDENTITIES)
    ids = sorted(set(ids))
    for i in ids:
        if i not in REGISTRY:
            raise UnknownEntry(f"unknown registry entry {i!r}")
    jobs = [(i, tier, seed) for i in ids]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_probe_job, jobs))
    else:
        entries = [_probe_job(j) for j in jobs]
    checks: list[IdentityCheck] = []
    kernel = kernel or {}
    for ident in sorted(identities or ()):
        for g in gammas:
            plan = MonteCarloPlan(sample_count=samples or TIER_SAMPLES[tier], seed=seed)
            spec = CollisionKernelSpec.named(g, kernel.get("b_profile", "one"), kernel.get("K", 1.0))
            checks.append(run_identity(ident, plan, spec))
    return RegistryReport(run_id, seed, tier, entries, checks)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, non-finite numbers as null."""
    return json.dumps(_clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for eid, label, x, l, e, r in rows:
        w.writerow([eid, label, repr(x), repr(l), repr(e), repr(r)])
    return buf.getvalue()
