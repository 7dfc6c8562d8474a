import numpy as np
import pytest
from scipy import special

from artifact.errors import ConfigurationError, NonFiniteField, VarianceOverflow
from artifact.grids import (
    MonteCarloPlan,
    SphereRule,
    VelocityGrid,
    integrate_velocity,
    mc_estimate,
    mean_and_error,
    sphere_integrate,
)
from artifact.quadrature import (
    composite,
    gauss_interval,
    graded_breaks,
    jacobi_radial,
    periodic_peak_rule,
)
from artifact.weights import maxwellian


def test_gauss_interval_broadcasts():
    x, w = gauss_interval(8, [0.0, 1.0], [1.0, 3.0])
    assert x.shape == (2, 8)
    np.testing.assert_allclose(w.sum(-1), [1.0, 2.0])
    np.testing.assert_allclose(np.sum(w * x ** 5, -1), [1 / 6, (3 ** 6 - 1) / 6])


def test_composite_and_graded():
    br = graded_breaks(0.0, 1.0, 20)
    assert br[0] == 0 and br[-1] == 1 and np.all(np.diff(br) > 0)
    x, w = composite(br, 8)
    assert np.dot(w, np.sqrt(x)) == pytest.approx(2 / 3, rel=1e-10)


def test_jacobi_radial_absorbs_power():
    r, w = jacobi_radial(12, 2.0, 2.0)
    assert np.dot(w, np.ones_like(r)) == pytest.approx(8 / 3)
    assert np.dot(w, np.exp(-r)) == pytest.approx(special.gammainc(3, 2.0) * 2.0, rel=1e-12)


def test_periodic_peak_rule():
    psi, w = periodic_peak_rule(64, 0.05)
    assert np.all(np.abs(psi) < np.pi)
    # Poisson kernel, width about 1 - rho around psi = 0
    rho = 0.97
    f = (1 - rho ** 2) / (1 - 2 * rho * np.cos(psi) + rho ** 2)
    assert np.dot(w, f) == pytest.approx(2 * np.pi, rel=1e-10)


def test_velocity_grid():
    g = VelocityGrid(8.0, 32)
    assert g.h == pytest.approx(0.5)
    assert g.nodes.shape == (32, 32, 32, 3)
    assert g.index_of([0.1, -0.1, 7.9]) == (16, 15, 31)
    assert integrate_velocity(g, g.sample(maxwellian)) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ConfigurationError):
        VelocityGrid(8.0, 4)
    with pytest.raises(ConfigurationError):
        integrate_velocity(g, np.ones((8, 8, 8)))
    bad = np.ones(g.shape)
    bad[0, 0, 0] = np.nan
    with pytest.raises(NonFiniteField):
        integrate_velocity(g, bad)


def test_sphere_rule_exactness():
    S = SphereRule.product(8, 16)
    assert sphere_integrate(S, lambda s: s[:, 2] ** 2) == pytest.approx(4 * np.pi / 3)
    assert sphere_integrate(S, lambda s: s[:, 0] ** 4) == pytest.approx(4 * np.pi / 5)
    # rotation invariance of a degree-4 polynomial integral
    th = 0.3
    R = np.array([[np.cos(th), -np.sin(th), 0], [np.sin(th), np.cos(th), 0], [0, 0, 1]])
    rot = S.rotated(R)
    assert sphere_integrate(rot, lambda s: s[:, 0] ** 2 * s[:, 1] ** 2) == pytest.approx(
        4 * np.pi / 15)
    with pytest.raises(ConfigurationError):
        SphereRule(S.nodes, S.weights * 2, 1)


def test_monte_carlo_plan_is_seeded():
    plan = MonteCarloPlan(2000, seed=7)
    a = plan.draw(2, 1)
    b = plan.draw(2, 1)
    for x, y in zip(a[0] + a[1], b[0] + b[1]):
        np.testing.assert_array_equal(x, y)
    other = MonteCarloPlan(2000, seed=8).draw(1)[0][0]
    assert not np.array_equal(a[0][0], other)
    with pytest.raises(ConfigurationError):
        MonteCarloPlan(0)
    with pytest.raises(ConfigurationError):
        MonteCarloPlan(10, proposal="cauchy")


@pytest.mark.parametrize("proposal", ["gaussian", "uniform-ball"])
def test_mc_estimate_unbiased(proposal):
    plan = MonteCarloPlan(40_000, seed=1, proposal=proposal, scale=1.2, radius=6.0)
    est, err = mc_estimate(plan, lambda v: maxwellian(v))
    assert abs(est - 1.0) < 4 * err
    est, err = mc_estimate(plan, lambda v, s: maxwellian(v) * s[:, 0] ** 2, 1, 1)
    assert abs(est - 4 * np.pi / 3) < 4 * err


def test_mean_and_error():
    m, e = mean_and_error(np.array([1.0, 3.0]))
    assert m == 2.0 and e == pytest.approx(1.0)
    with pytest.raises(VarianceOverflow):
        mean_and_error(np.array([1.0, np.inf]))
