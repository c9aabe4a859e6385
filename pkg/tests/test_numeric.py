import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ellcover.errors import ContractError
from ellcover.numeric import (
    bisect_monotone,
    norm_extrema_batch,
    norm_extrema_on_ball,
    nonsingular,
    power_sum_bounds,
    solve_power_sum,
    spectral_norm,
    spectral_norms,
    sym_eig,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@given(arrays(float, (4, 4), elements=finite))
@settings(max_examples=60, deadline=None)
def test_sym_eig_matches_lapack(A):
    S = A + A.T
    eig = sym_eig(S)
    ref = np.linalg.eigvalsh(S)[::-1]
    assert np.allclose(eig.eigenvalues, ref, atol=1e-10 * max(1.0, np.abs(S).max()))
    assert np.allclose(eig.basis.T @ eig.basis, np.eye(4), atol=1e-12)
    assert np.allclose(eig.reconstruct(), S, atol=1e-10 * max(1.0, np.abs(S).max()))


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(ContractError):
        sym_eig([[1.0, 2.0], [0.0, 1.0]])


def test_sym_eig_known_values():
    eig = sym_eig([[2.0, 1.0], [1.0, 2.0]])
    assert eig.eigenvalues == pytest.approx([3.0, 1.0], abs=1e-15)


@given(arrays(float, (3, 3), elements=finite))
@settings(max_examples=60, deadline=None)
def test_spectral_norm_matches_svd(A):
    assert spectral_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-10, abs=1e-12)


def test_spectral_norms_batch(gen):
    A = gen.standard_normal((50, 3, 3))
    assert np.allclose(spectral_norms(A), np.linalg.norm(A, 2, axis=(1, 2)), rtol=1e-12)


def _sampled_extrema(A, d, gen, count=200_000):
    n = len(d)
    g = gen.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = gen.random(count) ** (1.0 / n)
    vals = np.linalg.norm(np.concatenate([g, g * r[:, None]]) @ A.T + d, axis=1)
    return vals.min(), vals.max()


@pytest.mark.parametrize("n", [2, 3])
def test_norm_extrema_bracket_sampling(n, gen):
    for _ in range(10):
        A = gen.standard_normal((n, n))
        d = gen.standard_normal(n) * 2
        lo, hi = norm_extrema_on_ball(A, d)
        slo, shi = _sampled_extrema(A, d, gen)
        # sampling can only see values inside [lo, hi], and gets close to both ends
        assert lo <= slo + 1e-12 and shi <= hi + 1e-12
        assert hi - shi < 1e-2 * hi
        assert slo - lo < 5e-2 * max(hi, 1.0)


def test_norm_extrema_closed_forms():
    # diagonal A, d = 0: extrema are 0 and the largest axis
    assert norm_extrema_on_ball(np.diag([3.0, 1.0]), [0.0, 0.0]) == pytest.approx((0.0, 3.0))
    # identity with offset: |u + d| ranges over [|d| - 1, |d| + 1]
    assert norm_extrema_on_ball(np.eye(2), [3.0, 4.0]) == pytest.approx((4.0, 6.0))
    # offset inside the image: minimum 0
    assert norm_extrema_on_ball(2 * np.eye(3), [0.5, 0.0, 0.0])[0] == pytest.approx(0.0, abs=1e-15)


def test_norm_extrema_batch_matches_scalar(gen):
    A = gen.standard_normal((20, 3, 3))
    d = gen.standard_normal((20, 3))
    lo, hi = norm_extrema_batch(A, d)
    for i in range(20):
        assert (lo[i], hi[i]) == pytest.approx(norm_extrema_on_ball(A[i], d[i]), rel=1e-12, abs=1e-14)


def test_bisect_monotone():
    root = bisect_monotone(lambda x: x ** 3 - 2.0, (0.0, 2.0), tol=1e-14)
    assert root == pytest.approx(2 ** (1 / 3), abs=1e-13)
    with pytest.raises(ContractError):
        bisect_monotone(lambda x: x + 5.0, (0.0, 1.0))


def test_power_sum_golden_ratio():
    assert solve_power_sum([1.0, 1.0], [1.0, 2.0]) == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-15)


def test_power_sum_equal_terms_hits_lower_bound():
    # a = (1/2, 1/2), beta = (1, 1): x = 1 equals the lower bound 2^{-1} * 2 exactly,
    # so the lower bound is attained, not strict
    x = solve_power_sum([0.5, 0.5], [1.0, 1.0])
    lower, b = power_sum_bounds([0.5, 0.5], [1.0, 1.0])
    assert x == pytest.approx(1.0, abs=1e-15)
    assert lower == pytest.approx(1.0) and b == pytest.approx(2.0)


@given(
    st.lists(st.floats(0.25, 4.0), min_size=2, max_size=4),
    st.lists(st.floats(1.0, 4.0), min_size=4, max_size=4),
)
@settings(max_examples=200, deadline=None)
def test_power_sum_residual_and_bounds(a, beta):
    beta = beta[: len(a)]
    x = solve_power_sum(a, beta)
    assert abs(sum(ai * x ** bi for ai, bi in zip(a, beta)) - 1.0) <= 1e-12
    lower, b = power_sum_bounds(a, beta)
    # the lower bound is attained when all terms coincide (see above)
    assert lower <= x * (1 + 1e-15) and x < b


def test_power_sum_contracts():
    with pytest.raises(ContractError):
        solve_power_sum([1.0], [1.0])
    with pytest.raises(ContractError):
        solve_power_sum([1.0, -1.0], [1.0, 1.0])


def test_nonsingular():
    assert nonsingular(np.eye(3))
    assert not nonsingular(np.diag([1.0, 1.0, 1e-14]))
