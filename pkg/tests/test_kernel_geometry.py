import numpy as np
import pytest

from artifact.errors import (
    AlreadySymmetrized,
    ConfigurationError,
    DegenerateDirection,
    SingularRelativeVelocity,
)
from artifact.kernel_geometry import (
    CollisionKernelSpec,
    CollisionPair,
    carleman_cos_theta,
    carleman_transform_point,
    collide,
    kernel_value,
    plane_basis,
    post_collision,
    symmetrized_kernel,
)


def _unit(rng, n):
    x = rng.normal(size=(n, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def test_collision_conserves_momentum_and_energy():
    rng = np.random.default_rng(0)
    v, vs = rng.normal(size=(2, 500, 3)) * 3
    vp, vsp, c = collide(v, vs, _unit(rng, 500))
    np.testing.assert_allclose(vp + vsp, v + vs, atol=1e-12)
    e0 = np.sum(v * v, 1) + np.sum(vs * vs, 1)
    e1 = np.sum(vp * vp, 1) + np.sum(vsp * vsp, 1)
    np.testing.assert_allclose(e1, e0, rtol=1e-12)
    assert np.all(np.abs(c) <= 1)


def test_relative_speed_preserved_and_angle():
    v = np.array([1.0, 0, 0])
    vs = np.array([-1.0, 0, 0])
    sigma = np.array([0.0, 1, 0])
    vp, vsp, c = collide(v, vs, sigma)
    np.testing.assert_allclose(vp, [0, 1, 0])
    np.testing.assert_allclose(vsp, [0, -1, 0])
    assert c == pytest.approx(0.0)


def test_identity_collision_convention():
    v = np.array([0.3, -0.2, 1.0])
    out = post_collision(CollisionPair(v, v, np.array([0.0, 0, 1])))
    np.testing.assert_array_equal(out.v_prime, v)
    np.testing.assert_array_equal(out.v_star_prime, v)
    assert out.cos_theta == 1.0


def test_kernel_value_hemisphere():
    spec = CollisionKernelSpec.named(1.0)
    up = CollisionPair([2.0, 0, 0], [0.0, 0, 0], [1.0, 0, 0])
    down = CollisionPair([2.0, 0, 0], [0.0, 0, 0], [-1.0, 0, 0])
    assert kernel_value(spec, up) == pytest.approx(2.0)
    assert kernel_value(spec, down) == 0.0


def test_kernel_value_coincident():
    pair = CollisionPair([1.0, 0, 0], [1.0, 0, 0], [0.0, 0, 1])
    with pytest.raises(SingularRelativeVelocity):
        kernel_value(CollisionKernelSpec.named(-1.0), pair)
    assert kernel_value(CollisionKernelSpec.named(0.0), pair) == 1.0
    assert kernel_value(CollisionKernelSpec.named(0.5), pair) == 0.0


@pytest.mark.parametrize("gamma", [-3.0, 1.5])
def test_gamma_range(gamma):
    with pytest.raises(ConfigurationError):
        CollisionKernelSpec.named(gamma)


def test_cutoff_bound_and_norm():
    spec = CollisionKernelSpec.named(0.0)
    assert spec.satisfies_cutoff()
    assert spec.angular_norm() == pytest.approx(2 * np.pi)
    with pytest.raises(ConfigurationError):
        CollisionKernelSpec.named(0.0, "linear")  # b reaches 2 > 1/K
    sq = CollisionKernelSpec.named(0.0, "square")
    assert not sq.satisfies_cutoff()  # vanishes at c = 0


def test_symmetrization():
    full = CollisionKernelSpec.named(0.0, "linear", cutoff_lower=0.5, support_restricted=False)
    sym = symmetrized_kernel(full)
    c = np.linspace(0, 1, 11)
    np.testing.assert_allclose(sym.b(c), 2.0)
    assert np.all(sym.b(-c[1:]) == 0)
    # same sphere integral: b(c) + b(-c) folds the lower hemisphere up
    assert sym.angular_norm() == pytest.approx(full.angular_norm())
    with pytest.raises(AlreadySymmetrized):
        symmetrized_kernel(sym)


def test_plane_basis():
    rng = np.random.default_rng(2)
    for n in rng.normal(size=(20, 3)):
        a, b = plane_basis(n)
        M = np.stack([a, b, n / np.linalg.norm(n)])
        np.testing.assert_allclose(M @ M.T, np.eye(3), atol=1e-12)
    np.testing.assert_array_equal(plane_basis([0, 0, 2.0])[0], plane_basis([0, 0, 5.0])[0])
    with pytest.raises(DegenerateDirection):
        plane_basis([0, 0, 0])


def test_carleman_point_is_a_collision():
    rng = np.random.default_rng(5)
    v = rng.normal(size=3)
    vp = rng.normal(size=3)
    a, b = plane_basis(vp - v)
    w = 0.7 * a - 1.3 * b
    vs, vsp, r, c_half, jac = carleman_transform_point(v, vp, w)
    # (v, v*) -> (v', v*') under sigma = (v' - v*') / |v - v*|
    u = v - vs
    sigma = (vp - vsp) / np.linalg.norm(u)
    p, ps, c = collide(v, vs, sigma)
    np.testing.assert_allclose(p, vp, atol=1e-12)
    np.testing.assert_allclose(ps, vsp, atol=1e-12)
    assert r == pytest.approx(np.linalg.norm(u))
    rho, t = np.linalg.norm(vp - v), np.linalg.norm(w)
    assert c == pytest.approx(float(carleman_cos_theta(rho, t)))
    assert jac == pytest.approx(4 / (rho * r))
    with pytest.raises(ConfigurationError):
        carleman_transform_point(v, vp, vp - v)
    with pytest.raises(DegenerateDirection):
        carleman_transform_point(v, v, w)
