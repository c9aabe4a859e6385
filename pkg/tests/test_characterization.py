import math

import numpy as np
import pytest

from ellcover.certify import ahlfors_certify
from ellcover.characterization import (
    build_xi_cover,
    derive_constants,
    inner_property_check,
    inscribed_centered_ellipsoid,
    quasi_convexity_certify,
    ray_radii,
    roundtrip_equivalence,
)
from ellcover.errors import ContractError, UnboundedBallError
from ellcover.geometry import contains_point, dilate, volume
from ellcover.metrics import make_metric
from ellcover.report import CertReport
from ellcover.streams import quasi_uniform_directions


def test_ray_radii_sup_norm():
    U = quasi_uniform_directions(16, 2)
    X = np.zeros((16, 2))
    R = ray_radii(make_metric("sup"), X, np.full(16, 0.5), U)
    assert np.allclose(R, 0.5 / np.abs(U).max(axis=1), rtol=1e-5)


def test_ray_radii_unbounded():
    # rho_0 never reaches 1e300 within the scale window
    with pytest.raises(UnboundedBallError):
        ray_radii(make_metric("sup"), np.zeros((1, 2)), np.array([1e300]), np.array([[1.0, 0.0]]))


def test_inscribed_rectangle_ellipse():
    m = make_metric("nsw", k=1)
    x = np.array([0.5, 0.0])
    xi = inscribed_centered_ellipsoid(m, x, 0.1)
    w, h = 0.1, max(0.1 ** 2, 0.5 * 0.1)
    assert np.allclose(np.abs(np.diag(xi.M)), [w, h])
    big = dilate(xi, math.sqrt(2) * (1 + 1e-9))
    for sx in (-1, 1):
        for sy in (-1, 1):
            assert contains_point(big, x + [sx * w, sy * h])


def test_inscribed_theta0_is_the_ball():
    m = make_metric("theta0")
    xi = inscribed_centered_ellipsoid(m, [0.2, 0.3], 0.01)
    # the ball is an ellipse of area r
    assert volume(xi) == pytest.approx(0.01, rel=1e-4)


@pytest.mark.parametrize("name,Q", [("euclidean", 1.0), ("sup", math.sqrt(2)), ("theta0", 1.0)])
def test_quasi_convexity_constant(name, Q, rng):
    rep = quasi_convexity_certify(make_metric(name), rng, samples=64)
    assert rep.passed and rep.witnesses == []
    assert rep.constants["Q"] == pytest.approx(Q, rel=1e-4)


def test_inner_property_nsw(rng):
    assert inner_property_check(make_metric("nsw", k=1), 1.0, 1.0, rng, samples=2000).passed
    bad = inner_property_check(make_metric("nsw", k=1), 4.0, 1.0, rng, samples=2000)
    assert not bad.passed and bad.witnesses


def test_inner_property_rejects_nonpositive(rng):
    with pytest.raises(ContractError):
        inner_property_check(make_metric("sup"), 0.0, 1.0, rng)


def test_derive_constants_example():
    led = derive_constants(1, 1, 1, 2)
    assert led.c3 == 1 and led.c == 3
    assert led.d == pytest.approx(4 / 3)
    assert led.epsilon == pytest.approx(math.log2(4 / 3), rel=1e-12)
    assert led.a == pytest.approx(0.75)
    eps = [derive_constants(1.02, 1.0, k, 2).epsilon for k in (1, 2, 4, 40)]
    assert eps == sorted(eps, reverse=True)
    with pytest.raises(ContractError):
        derive_constants(0.5, 1, 1, 2)


def test_build_xi_needs_certificates(rng):
    m = make_metric("isotropic")
    quasi = quasi_convexity_certify(m, rng, samples=16)
    with pytest.raises(ContractError):
        build_xi_cover(m, quasi, None)
    with pytest.raises(ContractError):
        build_xi_cover(m, quasi, CertReport("ahlfors", False, {"c1": 1.0}))


def test_xi_roundtrip_isotropic(rng):
    m = make_metric("isotropic")
    quasi = quasi_convexity_certify(m, rng, samples=32)
    ahl = ahlfors_certify(m, rng, centers=2, mc_points=5000)
    xi = build_xi_cover(m, quasi, ahl)
    # volume sandwich |B| / (Q^n c1) <= |xi| <= |B|
    for r in (0.01, 1.0):
        M = xi.matrices(np.array([[0.1, 0.2]]), -math.log2(r))[0]
        v = math.pi * abs(np.linalg.det(M))
        assert r / (xi.Q ** 2 * xi.c1) <= v <= r * (1 + 1e-6)
    rep = roundtrip_equivalence(m, xi, rng, pairs=64, seeds=2, kappa=2.0, pool=2000)
    assert rep.passed
    assert rep.constants["ratio_max"] == pytest.approx(1.0, rel=1e-4)
