"""Dense numeric primitives shared by the geometry and metric code.

All functions are pure: they never mutate their inputs, so arrays can be shared
freely between threads.
"""
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _kernels
from .errors import ContractError, NumericError

SYMMETRY_RTOL = 1e-12
DET_FLOOR = 1e-12
MAX_DIM = 8


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order and the orthogonal basis (columns)."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self):
        V = self.basis
        return (V * self.eigenvalues) @ V.T


def as_matrix(A, square=True):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or (square and A.shape[0] != A.shape[1]):
        raise ContractError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ContractError("matrix has non-finite entries")
    return A


def as_vector(v, n=None):
    v = np.asarray(v, dtype=float).reshape(-1)
    if n is not None and v.shape[0] != n:
        raise ContractError(f"expected a vector of length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ContractError("vector has non-finite entries")
    return v


def sym_eig(S) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations."""
    S = as_matrix(S)
    scale = np.max(np.abs(S)) if S.size else 0.0
    if np.max(np.abs(S - S.T), initial=0.0) > SYMMETRY_RTOL * max(scale, 1e-300):
        raise ContractError("sym_eig requires a symmetric matrix")
    w, V, ok = _kernels.jacobi_eigh(np.ascontiguousarray(S))
    if not ok:
        raise NumericError("Jacobi sweeps did not converge")
    return EigenDecomposition(w, V)


def spectral_norm(A) -> float:
    """Operator 2-norm, max over unit x of |Ax|."""
    A = as_matrix(A, square=False)
    value, ok = _kernels.spectral_norm_kernel(np.ascontiguousarray(A))
    if not ok:
        raise NumericError("Jacobi sweeps did not converge")
    return float(value)


def spectral_norms(A):
    """Spectral norms of a stack of matrices with shape (k, n, n)."""
    A = np.ascontiguousarray(A, dtype=float)
    values, ok = _kernels.spectral_norm_batch(A)
    if not np.all(ok):
        raise NumericError("Jacobi sweeps did not converge")
    return values


def norm_extrema_on_ball(A, d):
    """Return ``(lo, hi)``: the min and max of |Au + d| over the closed unit ball.

    The maximum is attained on the sphere and solves a secular equation in the
    eigenbasis of A^T A; the minimum is either 0-residual interior or a
    trust-region boundary solution.
    """
    A = as_matrix(A)
    d = as_vector(d, A.shape[0])
    lo, hi, ok = _kernels.norm_extrema(np.ascontiguousarray(A), d)
    if not ok:
        raise NumericError("secular equation solver hit its iteration cap")
    return float(lo), float(hi)


def norm_extrema_batch(A, d):
    """Vectorised :func:`norm_extrema_on_ball` over stacks ``(k, n, n)``, ``(k, n)``."""
    A = np.ascontiguousarray(A, dtype=float)
    d = np.ascontiguousarray(d, dtype=float)
    if A.shape[0] == 0:
        return np.empty(0), np.empty(0)
    lo, hi, ok = _kernels.norm_extrema_batch(A, d)
    if not np.all(ok):
        raise NumericError("secular equation solver hit its iteration cap")
    return lo, hi


def bisect_monotone(f, bracket, tol=1e-12):
    """Locate the sign change of a monotone scalar function inside ``bracket``."""
    tlo, thi = map(float, bracket)
    flo, fhi = f(tlo), f(thi)
    if flo == 0.0:
        return tlo
    if fhi == 0.0:
        return thi
    if np.sign(flo) == np.sign(fhi):
        raise ContractError(f"f has the same sign at both ends of {bracket}")
    return float(optimize.bisect(f, tlo, thi, xtol=tol, rtol=4 * np.finfo(float).eps))


def power_sum_bounds(a, beta):
    """Lower and upper bounds on the root of sum a_i x^beta_i = 1."""
    a = np.asarray(a, dtype=float)
    beta = np.asarray(beta, dtype=float)
    b = float(np.min(a ** (-1.0 / beta)))
    lower = float(np.min(len(a) ** (-1.0 / beta))) * b
    return lower, b


def solve_power_sum(a, beta) -> float:
    """Positive root x of sum_i a_i x**beta_i = 1 for positive a, beta (d >= 2)."""
    a = as_vector(a)
    beta = as_vector(beta, a.shape[0])
    if a.shape[0] < 2:
        raise ContractError("solve_power_sum needs at least two terms")
    if np.any(a <= 0) or np.any(beta <= 0):
        raise ContractError("coefficients and exponents must be positive")
    x, ok = _kernels.power_sum_root(a, beta)
    if not ok:
        raise NumericError("power-sum root did not converge")
    return float(x)


def nonsingular(M, floor=DET_FLOOR) -> bool:
    """True when |det M| >= floor * ||M||^n."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    norm = spectral_norm(M)
    if norm == 0.0:
        return False
    return abs(np.linalg.det(M)) >= floor * norm ** n
