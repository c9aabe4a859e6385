"""Quasi-distances: closed forms and distances induced by covers.

A :class:`QuasiDistance` evaluates pairs in batches.  The first argument is
the ball center throughout: ``B(x, r) = {y : rho(x, y) < r}``.
"""
import math

import numpy as np

from . import _kernels
from .covers import Cover, NSWCover, Theta0Cover, nsw_half_widths, theta0_axes
from .errors import ContractError, ScaleRangeError
from .geometry import unit_ball_volume

T_RANGE = (-60.0, 80.0)
RHO_RTOL = 1e-8

CASE_NAMES = {0: "same", 1: "ball", 2: "flat", 3: "middle"}


def _pairs(X, Y, n=None):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    X, Y = np.broadcast_arrays(X, Y)
    if n is not None and X.shape[1] != n:
        raise ContractError(f"expected points in R^{n}, got shape {X.shape}")
    return np.ascontiguousarray(X), np.ascontiguousarray(Y)


def rho_one_sided(cover: Cover, X, Y, rtol=RHO_RTOL, t_range=T_RANGE):
    """``inf{|theta(x, t)| : y in theta(x, t)}`` for each pair, by lockstep bisection on t.

    Returns an array; pairs with ``x == y`` give 0.
    """
    if not cover.nested:
        raise ContractError("one-sided distance needs a cover nested in t")
    X, Y = _pairs(X, Y, cover.dim)
    out = np.zeros(len(X))
    live = np.flatnonzero(np.any(X != Y, axis=1))
    if live.size == 0:
        return out
    X, Y = X[live], Y[live]
    tmin, tmax = t_range
    t0 = np.clip(cover.scale_guess(X, Y), tmin, tmax)
    inside0 = cover.member(X, t0, Y)
    lo = np.where(inside0, t0, np.nan)
    hi = np.where(inside0, np.nan, t0)

    step = 1.0
    while np.isnan(lo).any() or np.isnan(hi).any():
        need_hi = np.isnan(hi)
        need_lo = np.isnan(lo)
        if need_hi.any():
            cand = np.minimum(t0 + step, tmax)
            res = cover.member(X[need_hi], cand[need_hi], Y[need_hi])
            idx = np.flatnonzero(need_hi)
            hi[idx[~res]] = cand[idx[~res]]
            lo[idx[res]] = cand[idx[res]]
        if need_lo.any():
            cand = np.maximum(t0 - step, tmin)
            res = cover.member(X[need_lo], cand[need_lo], Y[need_lo])
            idx = np.flatnonzero(need_lo)
            lo[idx[res]] = cand[idx[res]]
            hi[idx[~res]] = cand[idx[~res]]
        still = np.isnan(lo) | np.isnan(hi)
        # once step spans the whole range both ends have been tried
        if still.any() and step >= tmax - tmin:
            j = np.flatnonzero(still)[0]
            raise ScaleRangeError(
                f"no scale in {list(t_range)} separates x={X[j].tolist()} and y={Y[j].tolist()}"
            )
        step *= 2.0

    # |theta| ~ 2^-t, so a relative volume tolerance is an absolute t tolerance
    ttol = math.log2(1.0 + rtol)
    while True:
        open_ = hi - lo > ttol
        if not open_.any():
            break
        idx = np.flatnonzero(open_)
        mid = 0.5 * (lo[idx] + hi[idx])
        res = cover.member(X[idx], mid, Y[idx])
        lo[idx[res]] = mid[res]
        hi[idx[~res]] = mid[~res]
    out[live] = cover.volumes(X, 0.5 * (lo + hi))
    return out


def rho_induced(cover: Cover, X, Y, rtol=RHO_RTOL, t_range=T_RANGE):
    """Symmetric ``min(rho1(x, y), rho1(y, x))``."""
    X, Y = _pairs(X, Y, cover.dim)
    both = rho_one_sided(cover, np.concatenate([X, Y]), np.concatenate([Y, X]), rtol, t_range)
    return np.minimum(both[: len(X)], both[len(X):])


def rho_theta0(X, Y, details=False):
    """Closed-form one-sided distance of the four-regime planar cover.

    With ``details`` also returns the case labels (1 ball, 2 flat, 3 middle,
    0 for x == y) and ``pi`` times the max-form comparison value.
    """
    X, Y = _pairs(X, Y, 2)
    val, case, maxform = _kernels.theta0_rho_batch(X, Y)
    if details:
        return val, case, maxform
    return val


def rho_nsw(k, X, Y):
    """``max{|d1|, min{|d2|^(1/(k+1)), |d2|/|x1|^k}}``; the second term is ``|d2|^(1/(k+1))`` when x1 = 0."""
    if int(k) != k or k < 0:
        raise ContractError("k must be a non-negative integer")
    X, Y = _pairs(X, Y, 2)
    d1 = np.abs(Y[:, 0] - X[:, 0])
    d2 = np.abs(Y[:, 1] - X[:, 1])
    root = d2 ** (1.0 / (k + 1))
    if k == 0:
        return np.maximum(d1, d2)
    scale = np.abs(X[:, 0]) ** k
    with np.errstate(divide="ignore", invalid="ignore"):
        lin = np.where(scale > 0, d2 / scale, np.inf)
    return np.maximum(d1, np.minimum(root, lin))


class QuasiDistance:
    """Batched quasi-distance with optional analytic ball information.

    ``symmetric`` is True for exactly symmetric metrics; ``kappa`` is the
    triangle constant when known.  Subclasses implement ``pairs``.
    """

    name = "metric"
    symmetric = False
    kappa = None

    def __init__(self, dim):
        self.dim = dim

    def pairs(self, X, Y):
        raise NotImplementedError

    def __call__(self, x, y) -> float:
        return float(self.pairs(np.asarray(x, float)[None], np.asarray(y, float)[None])[0])

    def box(self, X, r):
        """Half-widths ``(N, n)`` of an axis box around ``X`` containing ``B(x, r)``, or None."""
        return None

    def rectangle(self, X, r):
        """Half-widths when the ball is exactly an open axis box, else None."""
        return None

    def contains(self, X, r, Y):
        return self.pairs(X, Y) < r

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class EuclideanMetric(QuasiDistance):
    name = "euclidean"
    symmetric = True
    kappa = 1.0

    def pairs(self, X, Y):
        X, Y = _pairs(X, Y, self.dim)
        return np.linalg.norm(Y - X, axis=1)

    def box(self, X, r):
        X = np.atleast_2d(X)
        return np.broadcast_to(np.asarray(r, float).reshape(-1, 1), X.shape).copy()


class IsotropicMetric(QuasiDistance):
    """``omega_n |x - y|^n``: the distance induced by the isotropic cover."""

    symmetric = True

    def __init__(self, n=2):
        super().__init__(n)
        self.name = f"isotropic{n}"
        self.kappa = 2.0 ** (n - 1)
        self._omega = unit_ball_volume(n)

    def pairs(self, X, Y):
        X, Y = _pairs(X, Y, self.dim)
        return self._omega * np.linalg.norm(Y - X, axis=1) ** self.dim

    def box(self, X, r):
        X = np.atleast_2d(X)
        rad = (np.asarray(r, float) / self._omega) ** (1.0 / self.dim)
        return np.broadcast_to(rad.reshape(-1, 1), X.shape).copy()


class Theta0Metric(QuasiDistance):
    """Closed-form one-sided distance of the four-regime planar cover.

    Its balls are exactly the cover ellipses: ``B(x, r)`` is the interior of
    ``theta(x, t)`` with ``pi 2^-t = r``.
    """

    name = "theta0"

    def __init__(self):
        super().__init__(2)

    def pairs(self, X, Y):
        return rho_theta0(X, Y)

    def box(self, X, r):
        X = np.atleast_2d(np.asarray(X, float))
        t = -np.log2(np.asarray(r, float) / math.pi)
        s1, s2 = theta0_axes(X[:, 1], np.broadcast_to(t, X.shape[:1]))
        return np.stack([s1, s2], axis=1)


class NSWMetric(QuasiDistance):
    """Closed-form ``rho_k``; its balls are the open rectangles of half-widths
    ``(delta, max(delta^{k+1}, |x1|^k delta))``."""

    def __init__(self, k=1):
        super().__init__(2)
        if int(k) != k or k < 0:
            raise ContractError("k must be a non-negative integer")
        self.k = int(k)
        self.name = f"nsw{self.k}"
        self.symmetric = self.k == 0
        if self.k == 0:
            self.kappa = 1.0

    def pairs(self, X, Y):
        return rho_nsw(self.k, X, Y)

    def rectangle(self, X, r):
        X = np.atleast_2d(np.asarray(X, float))
        w, h = nsw_half_widths(X[:, 0], np.broadcast_to(np.asarray(r, float), X.shape[:1]), self.k)
        return np.stack([w, h], axis=1)

    box = rectangle


class InducedMetric(QuasiDistance):
    """Distance induced by a cover: one-sided ``rho1`` or its symmetric ``min`` form."""

    def __init__(self, cover: Cover, symmetric=True, rtol=RHO_RTOL):
        super().__init__(cover.dim)
        self.cover = cover
        self.symmetric = symmetric
        self.rtol = rtol
        self.name = ("induced" if symmetric else "one_sided") + f"({cover.name})"

    def pairs(self, X, Y):
        if self.symmetric:
            return rho_induced(self.cover, X, Y, self.rtol)
        return rho_one_sided(self.cover, X, Y, self.rtol)


def make_metric(name, k=1, dim=2) -> QuasiDistance:
    """Construct a built-in metric by name."""
    if name == "theta0":
        return Theta0Metric()
    if name == "nsw":
        return NSWMetric(k)
    if name == "sup":
        return NSWMetric(0)
    if name == "isotropic":
        return IsotropicMetric(dim)
    if name == "euclidean":
        return EuclideanMetric(dim)
    if name == "induced-theta0":
        return InducedMetric(Theta0Cover())
    if name == "induced-nsw":
        return InducedMetric(NSWCover(k))
    raise ContractError(f"unknown metric {name!r}")


METRIC_NAMES = ("theta0", "nsw", "sup", "isotropic", "euclidean", "induced-theta0", "induced-nsw")
