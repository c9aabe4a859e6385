"""Ellipsoids ``M(B^n) + c`` and the predicates built on them."""
from dataclasses import dataclass
from math import gamma, pi

import numpy as np

from .errors import ContractError
from .numeric import (
    MAX_DIM,
    as_matrix,
    as_vector,
    norm_extrema_batch,
    norm_extrema_on_ball,
    nonsingular,
    sym_eig,
)
from .report import CertReport
from .streams import SeededRng, as_rng, random_orthogonal

POINT_TOL = 1e-12
CONTAIN_TOL = 1e-10
SAME_CENTER_TOL = 1e-12


def unit_ball_volume(n: int) -> float:
    return pi ** (n / 2) / gamma(n / 2 + 1)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """The point set ``M(B^n) + c`` for a nonsingular ``M``."""

    M: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        M = as_matrix(self.M)
        n = M.shape[0]
        if not 1 <= n <= MAX_DIM:
            raise ContractError(f"dimension {n} outside 1..{MAX_DIM}")
        c = as_vector(self.c, n)
        if not nonsingular(M):
            raise ContractError("ellipsoid matrix is singular (|det M| below floor)")
        M.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "c", c)

    @classmethod
    def ball(cls, center, radius=1.0):
        center = as_vector(center)
        return cls(radius * np.eye(center.shape[0]), center)

    @classmethod
    def axis_aligned(cls, center, semi_axes):
        return cls(np.diag(as_vector(semi_axes)), center)

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def recentered(self, center=None) -> "Ellipsoid":
        return Ellipsoid(self.M, np.zeros(self.dim) if center is None else center)

    def boundary(self, directions):
        """Points ``c + M u`` for unit vectors ``u`` (rows)."""
        return self.c + np.asarray(directions) @ self.M.T

    def __repr__(self):
        return f"Ellipsoid(M={self.M.tolist()}, c={self.c.tolist()})"


def volume(xi: Ellipsoid) -> float:
    return abs(float(np.linalg.det(xi.M))) * unit_ball_volume(xi.dim)


def dilate(xi: Ellipsoid, lam: float) -> Ellipsoid:
    """``lam * xi``: scale about the center."""
    if not lam > 0:
        raise ContractError(f"dilation factor must be positive, got {lam}")
    return Ellipsoid(lam * xi.M, xi.c)


def contains_point(xi: Ellipsoid, p) -> bool:
    p = as_vector(p, xi.dim)
    return bool(np.linalg.norm(np.linalg.solve(xi.M, p - xi.c)) <= 1.0 + POINT_TOL)


def _normalized_pair(inner: Ellipsoid, outer: Ellipsoid):
    if inner.dim != outer.dim:
        raise ContractError("ellipsoids of different dimension")
    A = np.linalg.solve(outer.M, inner.M)
    d = np.linalg.solve(outer.M, inner.c - outer.c)
    return A, d


def containment_ratio(inner: Ellipsoid, outer: Ellipsoid) -> float:
    """Smallest ``lam`` with ``inner`` inside ``outer`` dilated by ``lam``."""
    return norm_extrema_on_ball(*_normalized_pair(inner, outer))[1]


def contains_ellipsoid(inner: Ellipsoid, outer: Ellipsoid) -> bool:
    """True when ``inner`` is a subset of ``outer``."""
    return containment_ratio(inner, outer) <= 1.0 + CONTAIN_TOL


def intersects(xi: Ellipsoid, eta: Ellipsoid) -> bool:
    lo, _ = norm_extrema_on_ball(*_normalized_pair(eta, xi))
    return lo <= 1.0 + CONTAIN_TOL


def containment_ratios(M_in, c_in, M_out, c_out):
    """Batched :func:`containment_ratio` on stacked matrices and centers."""
    A = np.linalg.solve(M_out, M_in)
    d = np.linalg.solve(M_out, (c_in - c_out)[..., None])[..., 0]
    return norm_extrema_batch(A, d)[1]


def gap_ratios(M1, c1, M2, c2):
    """Batched ``lo`` values; ``<= 1`` exactly when the ellipsoids meet."""
    A = np.linalg.solve(M1, M2)
    d = np.linalg.solve(M1, (c2 - c1)[..., None])[..., 0]
    return norm_extrema_batch(A, d)[0]


def diag_reduce(A):
    """Return ``(U, D)`` with ``U`` orthogonal and ``U A(B^n) = D(B^n)``.

    ``D = diag(sqrt(lambda_i))`` for the eigenvalues of ``A A^T`` in descending
    order, and ``U`` is the transpose of their eigenbasis.
    """
    A = as_matrix(A)
    if not nonsingular(A):
        raise ContractError("diag_reduce needs a nonsingular matrix")
    eig = sym_eig(A @ A.T)
    return eig.basis.T, np.diag(np.sqrt(np.maximum(eig.eigenvalues, 0.0)))


def check_reverse_inclusion(eta: Ellipsoid, xi: Ellipsoid) -> CertReport:
    """Check that ``eta ⊆ xi`` forces ``xi ⊆ 2(|xi|/|eta|)·eta``.

    For concentric pairs the factor 2 is dropped.  The report carries the
    exact smallest dilation factor of ``eta`` that covers ``xi``.
    """
    if not contains_ellipsoid(eta, xi):
        raise ContractError("check_reverse_inclusion requires eta ⊆ xi")
    ratio = volume(xi) / volume(eta)
    same_center = bool(np.max(np.abs(eta.c - xi.c)) <= SAME_CENTER_TOL)
    bound = ratio if same_center else 2.0 * ratio
    tightest = containment_ratio(xi, eta)
    passed = tightest <= bound * (1.0 + CONTAIN_TOL)
    witnesses = [] if passed else [{"tightest_factor": tightest, "bound": bound}]
    return CertReport(
        "reverse_inclusion",
        passed,
        constants={"tightest_factor": tightest, "bound": bound, "volume_ratio": ratio},
        witnesses=witnesses,
        samples=1,
        details={"same_center": same_center},
    )


def random_ellipsoid(rng, n, log_axis_range=(-1.0, 1.0), center_box=1.0) -> Ellipsoid:
    """``R diag(sigma) R'`` with Haar rotations and log2 sigma uniform in range."""
    lo, hi = log_axis_range
    if lo > hi:
        raise ContractError("log_axis_range must satisfy lo <= hi")
    gen = as_rng(rng).generator() if isinstance(rng, (SeededRng, int)) else rng
    R = random_orthogonal(gen, n)
    R2 = random_orthogonal(gen, n)
    sigma = 2.0 ** gen.uniform(lo, hi, n)
    center = gen.uniform(-center_box, center_box, n)
    return Ellipsoid((R * sigma) @ R2, center)
