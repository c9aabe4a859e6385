import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ellcover.errors import ContractError
from ellcover.geometry import (
    Ellipsoid,
    check_reverse_inclusion,
    containment_ratio,
    containment_ratios,
    contains_ellipsoid,
    contains_point,
    diag_reduce,
    dilate,
    gap_ratios,
    intersects,
    random_ellipsoid,
    unit_ball_volume,
    volume,
)
from ellcover.streams import SeededRng


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_ellipsoid_contracts():
    with pytest.raises(ContractError):
        Ellipsoid(np.zeros((2, 2)), [0.0, 0.0])
    with pytest.raises(ContractError):
        Ellipsoid(np.eye(2), [0.0, 0.0, 0.0])
    with pytest.raises(ContractError):
        Ellipsoid(np.eye(9), np.zeros(9))
    with pytest.raises(ContractError):
        dilate(Ellipsoid.ball([0, 0]), 0.0)


def test_ellipsoid_is_immutable():
    xi = Ellipsoid.ball([0.0, 0.0])
    with pytest.raises(ValueError):
        xi.M[0, 0] = 5.0


def test_volume_and_dilation():
    xi = Ellipsoid.axis_aligned([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert volume(xi) == pytest.approx(4 * math.pi / 3 * 6)
    assert volume(dilate(xi, 2.0)) == pytest.approx(8 * volume(xi))
    assert np.array_equal(dilate(xi, 2.0).c, xi.c)


def test_contains_point_boundary():
    xi = Ellipsoid.axis_aligned([1.0, 1.0], [2.0, 0.5])
    assert contains_point(xi, [3.0, 1.0])
    assert contains_point(xi, [1.0, 1.5])
    assert not contains_point(xi, [3.0 + 1e-9, 1.0])


def test_containment_simple_cases():
    unit = Ellipsoid.ball([0.0, 0.0])
    assert contains_ellipsoid(Ellipsoid.ball([0.5, 0.0], 0.5), unit)  # internally tangent
    assert not contains_ellipsoid(Ellipsoid.ball([0.5, 0.0], 0.5 + 1e-8), unit)
    assert containment_ratio(Ellipsoid.ball([0.0, 0.0], 0.3), unit) == pytest.approx(0.3)
    assert intersects(unit, Ellipsoid.ball([2.0, 0.0]))  # externally tangent
    assert not intersects(unit, Ellipsoid.ball([2.0 + 1e-8, 0.0]))


def test_batched_ratios_match_scalar():
    gen = np.random.default_rng(0)
    pairs = [(random_ellipsoid(gen, 3), random_ellipsoid(gen, 3)) for _ in range(20)]
    Min = np.stack([a.M for a, _ in pairs])
    cin = np.stack([a.c for a, _ in pairs])
    Mout = np.stack([b.M for _, b in pairs])
    cout = np.stack([b.c for _, b in pairs])
    hi = containment_ratios(Min, cin, Mout, cout)
    lo = gap_ratios(Mout, cout, Min, cin)
    for i, (a, b) in enumerate(pairs):
        assert hi[i] == pytest.approx(containment_ratio(a, b), rel=1e-12)
        assert (lo[i] <= 1 + 1e-10) == intersects(b, a)


@given(st.integers(2, 5), st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_diag_reduce_maps_ellipsoid_to_axes(n, seed):
    A = random_ellipsoid(SeededRng(seed), n, (-2, 2)).M
    U, D = diag_reduce(A)
    assert np.allclose(U @ U.T, np.eye(n), atol=1e-12)
    # U A (B^n) = D (B^n)  <=>  (U A)(U A)^T = D^2
    assert np.allclose((U @ A) @ (U @ A).T, D @ D, rtol=1e-10, atol=1e-12 * np.abs(A).max() ** 2)
    assert np.all(np.diff(np.diag(D)) <= 0)


@given(st.integers(2, 5), st.integers(0, 10_000), st.floats(1.0, 4.0), st.booleans())
@settings(max_examples=80, deadline=None)
def test_reverse_inclusion_property(n, seed, grow, same_center):
    gen = np.random.default_rng(seed)
    eta = random_ellipsoid(gen, n, (-1, 1))
    xi0 = random_ellipsoid(gen, n, (-1, 1))
    c = eta.c if same_center else xi0.c
    xi0 = Ellipsoid(xi0.M, c)
    lam = containment_ratio(eta, xi0) * grow
    xi = Ellipsoid(xi0.M * lam, c)
    rep = check_reverse_inclusion(eta, xi)
    assert rep.passed
    assert rep.details["same_center"] == same_center
    assert rep.constants["tightest_factor"] <= rep.constants["bound"] * (1 + 1e-10)


def test_reverse_inclusion_needs_subset():
    with pytest.raises(ContractError):
        check_reverse_inclusion(Ellipsoid.ball([0, 0], 2.0), Ellipsoid.ball([0, 0]))


def test_reverse_inclusion_tight_for_balls():
    # concentric balls: the factor |xi|/|eta| is not attained except in n = 1,
    # but the tightest dilation is the radius ratio
    rep = check_reverse_inclusion(Ellipsoid.ball([0, 0], 1.0), Ellipsoid.ball([0, 0], 3.0))
    assert rep.constants["tightest_factor"] == pytest.approx(3.0)
    assert rep.constants["bound"] == pytest.approx(9.0)


def test_random_ellipsoid_deterministic():
    a = random_ellipsoid(SeededRng(3), 4)
    b = random_ellipsoid(SeededRng(3), 4)
    assert np.array_equal(a.M, b.M) and np.array_equal(a.c, b.c)
    with pytest.raises(ContractError):
        random_ellipsoid(SeededRng(3), 2, (1.0, -1.0))
