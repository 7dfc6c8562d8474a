import csv
import io
import json

import numpy as np
import pytest

from artifact.errors import PreconditionViolated, UnknownEntry, UnknownIdentity
from artifact.grids import MonteCarloPlan
from artifact.kernel_geometry import CollisionKernelSpec
from artifact.lab import (
    IDENTITIES,
    REGISTRY,
    Resolution,
    dumps,
    entry_ids,
    feasible_p,
    fit_envelope,
    power_law_exponent,
    probe_bound,
    registry_report,
    run_identity,
)
from artifact.lab import integrals as I
from artifact.lab.report import CSV_HEADER


# -- envelope fitting ---------------------------------------------------------

def test_envelope_recovers_exact_combination():
    x = np.geomspace(0.1, 100, 60)
    basis = np.stack([np.ones_like(x), x ** -2], 1)
    lhs = 3.0 + 0.5 * x ** -2
    fit = fit_envelope(lhs, basis)
    np.testing.assert_allclose(fit.constants, [3.0, 0.5], rtol=1e-4)
    assert fit.max_ratio <= 1 + 1e-6
    assert fit.residual < 1e-6


def test_envelope_dominates_noisy_data():
    rng = np.random.default_rng(0)
    x = np.geomspace(1, 50, 80)
    lhs = x ** -1.5 * (1 + 0.2 * rng.random(80))
    fit = fit_envelope(lhs, (x ** -1.5)[:, None])
    assert np.all(fit.envelope >= lhs * (1 - 1e-12))
    assert fit.constants[0] == pytest.approx(np.max(lhs * x ** 1.5), rel=1e-6)


def test_free_column_absorbs_the_shortfall():
    x = np.geomspace(0.1, 100, 50)
    basis = np.stack([1 / x, np.exp(-x)], 1)
    lhs = 2 / x + 5 * np.exp(-x) * (x < 1)
    fit = fit_envelope(lhs, basis, free=1, fit_rows=x >= 10)
    assert fit.constants[0] == pytest.approx(2.0, rel=1e-6)
    assert fit.max_ratio <= 1 + 1e-6
    assert fit_envelope(lhs, basis, free=7).finite


def test_envelope_degenerate_inputs():
    fit = fit_envelope(np.zeros(5), np.ones((5, 2)))
    assert np.all(fit.constants == 0) and fit.max_ratio == 0
    # ratios near 1e300: column scaling must not overflow
    big = fit_envelope(np.array([1e-200, 2e-200]), np.array([[1e100], [1e100]]))
    assert big.finite and big.max_ratio <= 1 + 1e-6


def test_power_law_exponent():
    k = np.array([8.0, 16, 32, 64])
    slope, r2 = power_law_exponent(k, 3 * k ** -0.75)
    assert slope == pytest.approx(-0.75) and r2 == pytest.approx(1.0)
    assert np.isnan(power_law_exponent(k, np.array([1.0, 0.0, 1.0, 1.0]))[0])


# -- radial integrals ----------------------------------------------------------

def test_beta_and_sup_oracles():
    from scipy import special
    assert I.beta_function(1.5, 2.5) == pytest.approx(special.beta(1.5, 2.5), rel=1e-10)
    for k, a in [(1, 0.5), (2, 1), (5, 4)]:
        sup, _ = I.sup_power_exp(k, a, 20.0)
        assert sup == pytest.approx((k / a) ** k * np.exp(-k), rel=1e-8)


def test_kernel_mass_profile_is_finite():
    spec = CollisionKernelSpec.named(0.0)
    out = I.kernel_mass_profile(spec, 20.0, 4.0)
    vals = np.atleast_1d(np.asarray(out if not isinstance(out, dict) else list(out.values()),
                                    dtype=float))
    assert np.all(np.isfinite(vals))


def test_feasible_p_table():
    tab = feasible_p(-2.0)
    assert tab  # at least one admissible p at gamma = -2
    assert json.loads(json.dumps(feasible_p(0.0))) == feasible_p(0.0)


# -- identities -----------------------------------------------------------------

@pytest.mark.parametrize("identity", sorted(IDENTITIES))
@pytest.mark.parametrize("gamma", [-1.0, 0.0])
def test_identities_hold(identity, gamma):
    chk = run_identity(identity, MonteCarloPlan(10_000, seed=3), CollisionKernelSpec.named(gamma))
    assert chk.passed, chk
    assert abs(chk.z) <= 3
    again = run_identity(identity, MonteCarloPlan(10_000, seed=3), CollisionKernelSpec.named(gamma))
    assert again == chk


def test_identity_detects_a_wrong_kernel():
    """The pre/post identity must fail when the two sides use different kernels."""
    plan = MonteCarloPlan(10_000, seed=1)
    chk = run_identity("regular-cov", plan, CollisionKernelSpec.named(0.0))
    other = run_identity("regular-cov", plan, CollisionKernelSpec.named(1.0))
    assert abs(chk.lhs - other.lhs) > 10 * (chk.lhs_error + other.lhs_error)


def test_unknown_identity():
    with pytest.raises(UnknownIdentity):
        run_identity("nope", MonteCarloPlan(10))


# -- registry ---------------------------------------------------------------------

def test_registry_contents():
    ids = entry_ids()
    assert len(ids) == 19 and ids == sorted(ids)
    for i in ("L2.9", "L6.2", "L6.3", "L7.4", "Beta", "Coercivity"):
        assert i in REGISTRY
    for e in REGISTRY.values():
        assert e.sweep and e.rhs_form and e.anchor
        for p in e.sweep:
            e.check(p)


def test_resolution_levels():
    a, b = Resolution(1), Resolution(2)
    assert b.n_radii > a.n_radii and b.n_configs > a.n_configs
    r = a.radii()
    assert r[0] == 0 and r[-1] == pytest.approx(64.0)


def test_preconditions():
    with pytest.raises(UnknownEntry):
        probe_bound("L9.9")
    with pytest.raises(PreconditionViolated):
        probe_bound("L2.9", sweep_override=[{"gamma": 0.0, "k": 2.0}])


@pytest.mark.parametrize("eid", ["L7.4", "L7.1", "Beta", "L2.15", "L2.16", "L7.5"])
def test_scalar_entries_pass(eid):
    rep = probe_bound(eid)
    assert rep.passed
    assert all(np.isfinite(c) for cs in rep.constants.values() for c in cs)


def test_probe_is_deterministic():
    a = probe_bound("L2.6", seed=5)
    b = probe_bound("L2.6", seed=5)
    assert dumps(a.to_dict()) == dumps(b.to_dict())


def test_l29_rows_and_scaling_claim():
    rep = probe_bound("L2.9", rerun=False)
    labels = {r[1] for r in rep.rows}
    assert labels == {"gamma=0,k=8", "gamma=0,k=16", "gamma=0,k=32", "gamma=0,k=64"}
    claim = rep.to_dict()["diagnostics"]["claims"][0]
    ratios = claim["groups"][0]["consecutive_ratios"]
    assert len(ratios) == 3
    # the k = 8 constant is the closed-form value at v = 0
    from scipy import special
    c8 = rep.constants["gamma=0,k=8"][0]
    assert c8 == pytest.approx(np.pi ** 1.5 * special.gamma(2.5) / special.gamma(4), rel=1e-5)


def test_report_serialization():
    rep = registry_report(["L7.4", "Beta"], run_id="abc", identities=["prepost"], samples=2000)
    doc = json.loads(rep.to_json())
    assert doc["run_id"] == "abc" and doc["resolution_tier"] == "smoke"
    assert [e["id"] for e in doc["entries"]] == ["Beta", "L7.4"]
    for e in doc["entries"]:
        assert set(e) == {"id", "title", "anchor", "rhs_form", "constants", "residual", "pass",
                          "diagnostics"}
    assert len(doc["identities"]) == 2
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert tuple(rows[0]) == CSV_HEADER
    assert {r[0] for r in rows[1:]} == {"Beta", "L7.4"}
    assert rep.to_json() == registry_report(["L7.4", "Beta"], run_id="abc",
                                            identities=["prepost"], samples=2000).to_json()


def test_dumps_maps_nonfinite_to_null():
    assert json.loads(dumps({"x": float("nan"), "y": [float("inf"), 1.0]})) == {
        "x": None, "y": [None, 1.0]}
