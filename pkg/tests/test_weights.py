import numpy as np
import pytest

from artifact.errors import ConfigurationError, NegativeDensity
from artifact.grids import VelocityGrid, integrate_velocity
from artifact.weights import (
    ExpWeight,
    PolyWeight,
    WeightLadder,
    bracket,
    entropy_csiszar_control,
    exp_weight_constants,
    exp_weight_profile,
    kernel_basis,
    maxwellian,
    moments,
    n_selector,
    norm_report,
    norm_weighted_L2,
    projection_P,
    relative_entropy,
)

GRID = VelocityGrid(8.0, 32)


def test_bracket_and_maxwellian():
    assert bracket(np.zeros(3)) == 1.0
    assert float(bracket([3.0, 4.0, 0.0])) == pytest.approx(np.sqrt(26))
    assert maxwellian(np.zeros(3)) == pytest.approx((2 * np.pi) ** -1.5)
    m = moments(GRID, GRID.sample(maxwellian))
    assert m.mass == pytest.approx(1.0)
    assert m.energy == pytest.approx(3.0)
    np.testing.assert_allclose(m.momentum, 0, atol=1e-14)


def test_weights():
    w = PolyWeight(4.0)
    assert w(np.array([1.0, 0, 0])) == pytest.approx(4.0)
    assert w.radial(1.0) == pytest.approx(4.0)
    e = ExpWeight(2.0, 0.5, 1.0)
    assert e.radial(0.0) == pytest.approx(np.exp(0.5))
    with pytest.raises(ConfigurationError):
        ExpWeight(0.0, 1.0, 2.0)
    with pytest.raises(ConfigurationError):
        ExpWeight(0.0, -1.0, 1.0)


@pytest.mark.parametrize("gamma,N", [(1.0, 2), (-1.5, 3), (-1.49, 2), (-2.5, 4), (-2.9, 4)])
def test_n_selector(gamma, N):
    assert n_selector(gamma) == N


def test_n_selector_range():
    with pytest.raises(ConfigurationError):
        n_selector(-3.0)


def test_weighted_norm_closed_form():
    # int mu^2 <v>^0 = (4 pi)^(-3/2)
    val = norm_weighted_L2(GRID, GRID.sample(maxwellian), PolyWeight(0.0))
    assert val ** 2 == pytest.approx((4 * np.pi) ** -1.5, rel=1e-8)
    rep = norm_report(GRID, GRID.sample(maxwellian), PolyWeight(2.0))
    assert rep["tail"] < 1e-10 * rep["value"]


def test_projection_onto_kernel():
    v = GRID.nodes
    mu = GRID.sample(maxwellian)
    basis = kernel_basis(GRID)
    gram = np.array([[integrate_velocity(GRID, a * b / mu) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(5), atol=1e-8)
    f = (v[..., 0] ** 3 + 0.5 * np.sum(v * v, -1) + 1.0) * mu
    Pf = projection_P(GRID, f)
    np.testing.assert_allclose(projection_P(GRID, Pf), Pf, atol=1e-12)
    r = f - Pf
    for phi in basis:
        assert abs(integrate_velocity(GRID, r * phi / mu)) < 1e-9


def test_relative_entropy():
    mu = GRID.sample(maxwellian)
    assert relative_entropy(GRID, mu) == pytest.approx(0.0, abs=1e-14)
    # Gaussian of temperature T: int F ln F - mu ln mu = -3/2 ln T
    T = 1.4
    s = np.sum(GRID.nodes ** 2, -1)
    F = (2 * np.pi * T) ** -1.5 * np.exp(-s / (2 * T))
    assert relative_entropy(GRID, F) == pytest.approx(-1.5 * np.log(T), rel=1e-6)
    # same mass and energy as mu: H > 0 and dominates the two-piece control
    for a in (0.02, 0.05, 0.09):
        F = mu * (1 + a * (s * s - 10 * s + 15))
        H = relative_entropy(GRID, F)
        q, lin = entropy_csiszar_control(GRID, F)
        assert 0 < q + lin <= H
    with pytest.raises(NegativeDensity):
        relative_entropy(GRID, -mu)


@pytest.mark.parametrize("gamma", [1.0, 0.0, -1.0, -2.0, -2.8])
def test_ladder_properties(gamma):
    lad = WeightLadder(gamma, 10.0)
    v = np.linspace(0, 50, 200)[:, None] * np.array([1.0, 0, 0])
    props = lad.check_properties(v)
    for key, val in props.items():
        assert val <= 1.0 + 1e-12, key
    assert WeightLadder.constant(1, 2) == pytest.approx(1e-6)


def test_exp_weight_constants():
    k, a, b = 6.0, 0.5, 1.0
    c1, c2 = exp_weight_constants(k, a, b)
    x = np.linspace(0, 400, 801)
    f = exp_weight_profile(x, k, a, b)
    # f(c) <= f(d) + C1 for c <= d
    worst = max(np.max(f[: i + 1]) - f[i] for i in range(len(x)))
    assert worst <= c1 + 1e-12
    X, Y = np.meshgrid(x, x)
    sub = exp_weight_profile(X + Y, k, a, b) - exp_weight_profile(X, k, a, b) - exp_weight_profile(Y, k, a, b)
    assert sub.max() <= c2 + 1e-9
