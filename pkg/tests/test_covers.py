import math

import numpy as np
import pytest

from ellcover.covers import (
    CorruptedCover,
    CoverParams,
    DiagonalCover,
    IsotropicCover,
    NSWCover,
    Theta0Cover,
    make_cover,
    nsw_half_widths,
    nsw_radius,
    shape_constants_convert,
    theta0_axes,
    theta0_regime,
)
from ellcover.errors import ContractError
from ellcover.geometry import contains_ellipsoid, volume


def test_cover_params_contracts():
    with pytest.raises(ContractError):
        CoverParams(2, 2.0, 1.0)
    with pytest.raises(ContractError):
        CoverParams(2, 1.0, 1.0, 1.0, 0.2, 1.0, 0.5)  # a6 > a4
    with pytest.raises(ContractError):
        CoverParams(2, 1.0, 1.0, -1.0, 1.0, 1.0, 0.5)
    assert not CoverParams(2, 1.0, 1.0).has_shape


def test_shape_constants_convert_isotropic():
    sc = shape_constants_convert(IsotropicCover(2).params)
    assert sc.s0 == 0.0
    assert sc.a3_prime == pytest.approx(1.0) and sc.a5_prime == pytest.approx(1.0)
    with pytest.raises(ContractError):
        shape_constants_convert(CoverParams(2, 1.0, 1.0))


def test_shape_constants_convert_values():
    p = CoverParams(2, 1.0, 4.0, 0.5, 1.0, 2.0, 0.5)
    sc = shape_constants_convert(p)
    assert sc.s0 == pytest.approx(2.0)
    assert sc.a3_tilde == pytest.approx(0.5)
    assert sc.a5_tilde == pytest.approx(max(2.0, 2.0 * 2 ** (-1.0)))
    assert sc.a3_prime == pytest.approx(0.5 * 0.25)
    assert sc.a5_prime == pytest.approx(2.0 * 2.0)


def test_theta0_table_rows():
    # one point per row of the semi-axis table, t = 6
    t = 6.0
    assert theta0_axes(0.5, t) == pytest.approx((2 ** -3, 2 ** -3))  # |x2| > 2^{-t/3}: round
    x2 = 2.0 ** -2.5  # between 2^{-t/2} and 2^{-t/3}: middle
    s1, s2 = theta0_axes(x2, t)
    assert (float(s1), float(s2)) == pytest.approx((2 ** -5 / x2, 2 ** -1 * x2))
    assert theta0_axes(2 ** -4, t) == pytest.approx((2 ** -2, 2 ** -4))  # flat
    assert theta0_axes(0.0, -3.0) == pytest.approx((2 ** 1.5, 2 ** 1.5))  # t <= 0
    assert list(theta0_regime([0.5, x2, 2 ** -4, 0.0], [t, t, t, -3.0])) == [1, 2, 3, 0]


def test_theta0_volume_exact_everywhere(gen):
    X = np.stack([gen.uniform(-3, 3, 2000), 2.0 ** gen.uniform(-40, 2, 2000)], axis=1)
    t = gen.uniform(-20, 60, 2000)
    cov = Theta0Cover()
    det_vol = math.pi * np.prod(cov.axes(X, t), axis=1)
    assert np.allclose(det_vol, math.pi * 2.0 ** -t, rtol=1e-13, atol=0)
    assert cov.eval(X[0], t[0]).c.tolist() == X[0].tolist()


@pytest.mark.parametrize("cover", [IsotropicCover(3), DiagonalCover([0.5, 0.3, 0.2]), Theta0Cover(), NSWCover(1), NSWCover(2)])
def test_covers_are_nested(cover, gen):
    n = cover.dim
    X = gen.uniform(-2, 2, (300, n)) * 2.0 ** gen.uniform(-10, 0, (300, 1))
    t = gen.uniform(-5, 20, 300)
    dt = gen.exponential(1.0, 300)
    for x, a, b in zip(X, t, t + dt):
        assert contains_ellipsoid(cover.eval(x, b), cover.eval(x, a))


@pytest.mark.parametrize("cover", [IsotropicCover(2), IsotropicCover(4), DiagonalCover([0.7, 0.3]), NSWCover(1), NSWCover(3)])
def test_declared_volume_constants(cover, gen):
    X = gen.uniform(-2, 2, (500, cover.dim))
    t = gen.uniform(-10, 30, 500)
    scaled = cover.volumes(X, t) * 2.0 ** t
    assert scaled.min() >= cover.params.a1 * (1 - 1e-12)
    assert scaled.max() <= cover.params.a2 * (1 + 1e-12)


def test_volumes_match_ellipsoid_volume(gen):
    cov = NSWCover(2)
    for x, t in zip(gen.uniform(-1, 1, (20, 2)), gen.uniform(-4, 16, 20)):
        assert volume(cov.eval(x, t)) == pytest.approx(float(cov.volumes(x[None], t)[0]), rel=1e-12)


def test_nsw_radius_inverts_area(gen):
    for k in (0, 1, 2, 3):
        x1 = np.concatenate([[0.0], 2.0 ** gen.uniform(-20, 2, 999)])
        t = gen.uniform(-10, 40, 1000)
        d = nsw_radius(x1, t, k)
        w, h = nsw_half_widths(x1, d, k)
        assert np.allclose(math.pi * w * h, 2.0 ** -t, rtol=1e-10)


def test_nsw_rectangle_widths():
    w, h = nsw_half_widths(0.0, 0.1, 1)
    assert (float(w), float(h)) == pytest.approx((0.1, 0.01))
    w, h = nsw_half_widths(2.0, 0.1, 2)
    assert float(h) == pytest.approx(0.4)


def test_make_cover():
    assert isinstance(make_cover("theta0"), Theta0Cover)
    assert make_cover("nsw", k=2).k == 2
    assert make_cover("diagonal", dim=3).dim == 3
    assert isinstance(make_cover("corrupted"), CorruptedCover)
    with pytest.raises(ContractError):
        make_cover("nope")
    with pytest.raises(ContractError):
        DiagonalCover([0.5, 0.6])


def test_corrupted_cover_halves_volume():
    cov = make_cover("corrupted")
    v = cov.volumes(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([3.0, 3.0])) * 8
    assert v == pytest.approx([math.pi / 2, math.pi])
