"""Continuous ellipsoid covers: families ``theta(x, t)`` of ellipsoids centered at x.

A cover is evaluated in batches: ``matrices(X, t)`` maps ``N`` centers and
scales to a ``(N, n, n)`` stack of shape matrices.  Built-in covers are all
axis-aligned and implement the cheaper ``axes`` form.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import ContractError
from .geometry import Ellipsoid, unit_ball_volume
from .numeric import MAX_DIM


@dataclass(frozen=True)
class CoverParams:
    """Volume constants a1, a2 and shape constants a3..a6 of a cover.

    Shape constants are ``None`` when a cover does not declare them; the
    validators estimate them instead.
    """

    dim: int
    a1: float
    a2: float
    a3: float | None = None
    a4: float | None = None
    a5: float | None = None
    a6: float | None = None

    def __post_init__(self):
        if not (0 < self.a1 <= self.a2):
            raise ContractError(f"need 0 < a1 <= a2, got a1={self.a1}, a2={self.a2}")
        shape = (self.a3, self.a4, self.a5, self.a6)
        if any(v is not None and v <= 0 for v in shape):
            raise ContractError("shape constants must be positive")
        if self.a4 is not None and self.a6 is not None and self.a6 > self.a4:
            raise ContractError("need a6 <= a4")

    @property
    def has_shape(self) -> bool:
        return None not in (self.a3, self.a4, self.a5, self.a6)

    def as_dict(self):
        return {k: getattr(self, k) for k in ("a1", "a2", "a3", "a4", "a5", "a6")}


@dataclass(frozen=True)
class ShapeConstants:
    s0: float
    a3_tilde: float
    a5_tilde: float
    a3_prime: float
    a5_prime: float


def shape_constants_convert(params: CoverParams) -> ShapeConstants:
    """Constants for the geometric (recentered-inclusion) form of the shape condition."""
    if not params.has_shape:
        raise ContractError("conversion needs all of a3..a6")
    a1, a2, a3, a4, a5, a6 = (params.a1, params.a2, params.a3, params.a4, params.a5, params.a6)
    s0 = math.log2(a2 / a1)
    a3_t = min(a3, 1.0 / a5)
    a5_t = max(a5, (1.0 / a3) * 2.0 ** ((a6 - a4) * s0))
    return ShapeConstants(
        s0=s0,
        a3_tilde=a3_t,
        a5_tilde=a5_t,
        a3_prime=a3_t * (a1 / a2) ** a4,
        a5_prime=a5_t * (a2 / a1) ** a6,
    )


def _points(X, n):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != n:
        raise ContractError(f"expected points in R^{n}, got shape {X.shape}")
    return X


class Cover:
    """Base class: subclasses implement ``matrices`` (or ``axes``)."""

    name = "cover"
    nested = True

    def __init__(self, params: CoverParams):
        if not 1 <= params.dim <= MAX_DIM:
            raise ContractError(f"dimension {params.dim} outside 1..{MAX_DIM}")
        self.params = params
        self.dim = params.dim

    def matrices(self, X, t):
        raise NotImplementedError

    def volumes(self, X, t):
        M = self.matrices(X, t)
        return np.abs(np.linalg.det(M)) * unit_ball_volume(self.dim)

    def member(self, X, t, Y):
        """Whether each ``Y[i]`` lies in the closed ellipsoid ``theta(X[i], t[i])``."""
        M = self.matrices(X, t)
        Y = _points(Y, self.dim)
        u = np.linalg.solve(M, (Y - _points(X, self.dim))[..., None])[..., 0]
        return np.einsum("ij,ij->i", u, u) <= 1.0

    def scale_guess(self, X, Y):
        """A scale at which ``theta(X)`` has roughly reached ``Y``."""
        dist = np.linalg.norm(_points(Y, self.dim) - _points(X, self.dim), axis=1)
        with np.errstate(divide="ignore"):
            return -math.log2(unit_ball_volume(self.dim)) - self.dim * np.log2(dist)

    def eval(self, x, t) -> Ellipsoid:
        x = np.asarray(x, dtype=float)
        return Ellipsoid(self.matrices(x[None, :], np.array([float(t)]))[0], x)

    def __call__(self, x, t) -> Ellipsoid:
        return self.eval(x, t)

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, dim={self.dim})"


class AxisAlignedCover(Cover):
    """Covers whose matrices are ``diag(axes(X, t))``."""

    def axes(self, X, t):
        raise NotImplementedError

    def matrices(self, X, t):
        ax = self.axes(X, t)
        out = np.zeros(ax.shape + (ax.shape[1],))
        idx = np.arange(ax.shape[1])
        out[:, idx, idx] = ax
        return out

    def volumes(self, X, t):
        return np.prod(self.axes(X, t), axis=1) * unit_ball_volume(self.dim)

    def member(self, X, t, Y):
        ax = self.axes(X, t)
        u = (_points(Y, self.dim) - _points(X, self.dim)) / ax
        return np.einsum("ij,ij->i", u, u) <= 1.0


class IsotropicCover(AxisAlignedCover):
    """Euclidean balls of volume exactly 2^-t."""

    def __init__(self, n=2):
        super().__init__(CoverParams(n, 1.0, 1.0, 1.0, 1.0 / n, 1.0, 1.0 / n))
        self.name = f"isotropic{n}"

    def axes(self, X, t):
        X = _points(X, self.dim)
        t = np.broadcast_to(np.asarray(t, dtype=float), X.shape[:1])
        r = (2.0 ** -t / unit_ball_volume(self.dim)) ** (1.0 / self.dim)
        return np.repeat(r[:, None], self.dim, axis=1)


class DiagonalCover(AxisAlignedCover):
    """Constant anisotropy: ``diag(2^{-e_1 t}, ..., 2^{-e_n t})`` with sum(e) = 1."""

    def __init__(self, exponents):
        e = np.asarray(exponents, dtype=float).reshape(-1)
        if e.size < 1 or np.any(e <= 0) or abs(e.sum() - 1.0) > 1e-12:
            raise ContractError("exponents must be positive and sum to 1")
        n = e.size
        w = unit_ball_volume(n)
        super().__init__(CoverParams(n, w, w, 1.0, float(e.max()), 1.0, float(e.min())))
        self.exponents = e
        self.name = "diagonal(" + ",".join(f"{v:g}" for v in e) + ")"

    def axes(self, X, t):
        X = _points(X, self.dim)
        t = np.broadcast_to(np.asarray(t, dtype=float), X.shape[:1])
        return 2.0 ** (-t[:, None] * self.exponents[None, :])


def theta0_axes(x2, t):
    """Semi-axes of the four-regime planar cover, as arrays ``(sigma1, sigma2)``."""
    x2 = np.abs(np.asarray(x2, dtype=float))
    t = np.asarray(t, dtype=float)
    x2, t = np.broadcast_arrays(x2, t)
    ball = 2.0 ** (-t / 2)
    round_ = (t <= 0) | (x2 > 2.0 ** (-t / 3))
    flat = ~round_ & (x2 <= ball)
    middle = ~round_ & ~flat
    with np.errstate(divide="ignore"):
        s1 = np.where(flat, 2.0 ** (-t / 3), np.where(middle, 2.0 ** (-5 * t / 6) / x2, ball))
    s2 = np.where(flat, 2.0 ** (-2 * t / 3), np.where(middle, 2.0 ** (-t / 6) * x2, ball))
    return s1, s2


THETA0_REGIME_NAMES = ("round-nonpositive", "round", "middle", "flat")


def theta0_regime(x2, t):
    """Row of the semi-axis table: 0 t<=0, 1 round, 2 middle, 3 flat."""
    x2 = np.abs(np.asarray(x2, dtype=float))
    t = np.asarray(t, dtype=float)
    out = np.full(np.broadcast(x2, t).shape, 3, dtype=int)
    out[x2 <= 2.0 ** (-t / 3)] = 2
    out[x2 <= 2.0 ** (-t / 2)] = 3
    out[x2 > 2.0 ** (-t / 3)] = 1
    out[t <= 0] = 0
    return out


class Theta0Cover(AxisAlignedCover):
    """Planar ellipses whose anisotropy switches with the distance to the x1-axis.

    Every ellipse has area exactly pi * 2^-t.  The shape constants declared here
    are the envelope constants of the two worked regime combinations
    (a3 = 1/3, a4 = 5/6, a5 = 3, a6 = 1/6).
    """

    name = "theta0"

    def __init__(self):
        super().__init__(CoverParams(2, math.pi, math.pi, 1.0 / 3, 5.0 / 6, 3.0, 1.0 / 6))

    def axes(self, X, t):
        X = _points(X, 2)
        t = np.broadcast_to(np.asarray(t, dtype=float), X.shape[:1])
        s1, s2 = theta0_axes(X[:, 1], t)
        return np.stack([s1, s2], axis=1)

    def volumes(self, X, t):
        X = _points(X, 2)
        return math.pi * 2.0 ** -np.broadcast_to(np.asarray(t, dtype=float), X.shape[:1])


def nsw_half_widths(x1, delta, k):
    """Half-widths ``(delta, max(delta^{k+1}, |x1|^k delta))`` of the rectangle ball."""
    delta = np.asarray(delta, dtype=float)
    ax1 = np.abs(np.asarray(x1, dtype=float))
    return delta, np.maximum(delta ** (k + 1), ax1 ** k * delta)


def nsw_radius(x1, t, k):
    """Largest delta whose inscribed ellipse has area at most 2^-t.

    The area ``pi * max(delta^{k+2}, |x1|^k delta^2)`` is increasing in delta,
    so each branch is inverted in closed form; rounding at the branch switch
    falls back to bisection in log delta.
    """
    t = np.asarray(t, dtype=float)
    ax1 = np.abs(np.asarray(x1, dtype=float))
    ax1, t = np.broadcast_arrays(ax1, t)
    target = 2.0 ** -t / math.pi
    if k == 0:
        return np.sqrt(target)
    far = target ** (1.0 / (k + 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.sqrt(target / ax1 ** k)
    delta = np.where(far >= ax1, far, near)
    bad = ~((far >= ax1) | (near <= ax1))
    if np.any(bad):
        delta = delta.copy()
        delta[bad] = _nsw_radius_bisect(ax1[bad], target[bad], k)
    return delta


def _nsw_radius_bisect(ax1, target, k):
    lo = np.log2(np.minimum(ax1, target ** (1.0 / (k + 2)))) - 2.0
    hi = np.log2(np.maximum(ax1, target ** (1.0 / (k + 2)))) + 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        d = 2.0 ** mid
        area = np.maximum(d ** (k + 2), ax1 ** k * d * d)
        under = area <= target
        lo = np.where(under, mid, lo)
        hi = np.where(under, hi, mid)
    return 2.0 ** lo


class NSWCover(AxisAlignedCover):
    """Ellipses inscribed in the rectangle balls of the vector fields d/dx1, x1^k d/dx2.

    ``theta(x, t)`` is the inscribed ellipse of the rectangle at the largest
    radius whose ellipse area does not exceed 2^-t.  Shape constants are not
    declared; they are measured.
    """

    def __init__(self, k=1):
        if int(k) != k or k < 0:
            raise ContractError("k must be a non-negative integer")
        super().__init__(CoverParams(2, 1.0, 1.0))
        self.k = int(k)
        self.name = f"nsw{self.k}"

    def radius(self, X, t):
        X = _points(X, 2)
        return nsw_radius(X[:, 0], np.broadcast_to(np.asarray(t, dtype=float), X.shape[:1]), self.k)

    def axes(self, X, t):
        X = _points(X, 2)
        w, h = nsw_half_widths(X[:, 0], self.radius(X, t), self.k)
        return np.stack([w, h], axis=1)


class CorruptedCover(Cover):
    """Wraps a cover and shrinks the volume by ``factor`` where x1 > 0.

    A fault-injection fixture for the validators; it keeps the parameters of
    the wrapped cover, so the volume condition fails on the corrupted half.
    """

    def __init__(self, base: Cover, factor=0.5):
        super().__init__(base.params)
        self.base = base
        self.factor = float(factor)
        self.nested = base.nested
        self.name = f"corrupted({base.name})"

    def matrices(self, X, t):
        X = _points(X, self.dim)
        M = self.base.matrices(X, t)
        scale = np.where(X[:, 0] > 0, self.factor ** (1.0 / self.dim), 1.0)
        return M * scale[:, None, None]


def make_cover(name, k=1, dim=2, exponents=None) -> Cover:
    """Construct a built-in cover by name."""
    if name == "isotropic":
        return IsotropicCover(dim)
    if name == "theta0":
        return Theta0Cover()
    if name == "nsw":
        return NSWCover(k)
    if name == "diagonal":
        if exponents is None:
            exponents = [1.0 / dim] * dim
        return DiagonalCover(exponents)
    if name == "corrupted":
        return CorruptedCover(Theta0Cover())
    raise ContractError(f"unknown cover {name!r}")


COVER_NAMES = ("isotropic", "diagonal", "theta0", "nsw", "corrupted")
