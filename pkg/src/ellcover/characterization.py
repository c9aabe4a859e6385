"""Quasi-convexity, the inner property, derived constants and the cover Xi of a metric.

The ellipsoid ``xi(x, r)`` attached to a ball ``B(x, r)`` is a centered
ellipsoid inscribed in the ball; ``Q`` is the smallest dilation of it that
covers the ball on the sampled directions.
"""
from dataclasses import asdict, dataclass
import math

import numpy as np

from .covers import Cover, CoverParams
from .errors import ContractError, NumericError, UnboundedBallError
from .geometry import CONTAIN_TOL, Ellipsoid, containment_ratios
from .metrics import QuasiDistance, rho_induced
from .report import CertReport, witness_rows
from .streams import as_rng, quasi_uniform_directions, run_chunks
from .validators import DEFAULT_BOX, engulf_constant, sample_points

RADIUS_RTOL = 1e-10
Q_EXACT_TOL = 1e-9
BOUNDARY_RTOL = 1e-6
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def default_directions(n):
    """64 directions in the plane, 512 in space, 128 n otherwise."""
    count = {2: 64, 3: 512}.get(n, 128 * n)
    return quasi_uniform_directions(count, n)


def directional_radii(metric: QuasiDistance, X, r, U, rtol=RADIUS_RTOL):
    """``R[i, j] = sup{s : x_i + s u_j in B(x_i, r_i)}`` by bisection in log s.

    Returns the member-side end of the final bracket, so ``x + R u`` is in the ball.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N = len(X)
    r = np.broadcast_to(np.asarray(r, dtype=float), (N,))
    U = np.atleast_2d(np.asarray(U, dtype=float))
    D = len(U)
    R = ray_radii(metric, np.repeat(X, D, axis=0), np.repeat(r, D), np.tile(U, (N, 1)), rtol)
    return R.reshape(N, D)


def ray_radii(metric: QuasiDistance, X, r, U, rtol=RADIUS_RTOL):
    """Radius of ``B(X[i], r[i])`` along the single direction ``U[i]``.

    Works in ``log2 s``: brackets the boundary, then shrinks the bracket by
    safeguarded linear interpolation of ``log rho`` (nearly linear for
    power-type distances), probing ``±tol/2`` around the estimate so the
    bracket usually closes within a few rounds.  Every third round bisects.
    """
    box = metric.box(X, r)
    if box is not None:
        with np.errstate(over="ignore"):
            hi = np.log2(1.01 * np.linalg.norm(box, axis=1))
    else:
        hi = np.log2(r) / X.shape[1]

    def gap(log_s, idx=slice(None)):
        # overflowing probes give nan, which never counts as outside
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            rho = metric.pairs(X[idx], X[idx] + (2.0 ** log_s)[:, None] * U[idx])
            return np.log2(rho) - np.log2(r[idx])

    f_hi = gap(hi)
    for _ in range(120):
        out = f_hi >= 0
        if out.all():
            break
        hi = np.where(out, hi, hi + 2.0)
        f_hi = gap(hi)
    else:
        raise UnboundedBallError(f"ball of {metric.name} looks unbounded along some direction")
    lo = hi - 30.0
    f_lo = gap(lo)
    for _ in range(12):
        ok = f_lo < 0
        if ok.all():
            break
        lo = np.where(ok, lo, lo - 10.0)
        f_lo = gap(lo)
    else:
        raise UnboundedBallError(f"ball of {metric.name} is empty or not star-shaped near its center")

    ltol = math.log2(1.0 + rtol)
    for rnd in range(400):
        idx = np.flatnonzero(hi - lo > ltol)
        if idx.size == 0:
            break
        a, b, fa, fb = lo[idx], hi[idx], f_lo[idx], f_hi[idx]
        mid = 0.5 * (a + b)
        if rnd % 3 == 2:
            probes = [mid]
        else:
            with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                est = a - fa * (b - a) / (fb - fa)
            est = np.where(np.isfinite(est), est, mid)
            half = 0.5 * ltol
            est = np.clip(est, a + half, b - half)
            probes = [est - half, est + half]
        for pt in probes:
            inner = (pt > lo[idx]) & (pt < hi[idx])
            f = gap(pt, idx)
            ok = (f < 0) & inner
            bad = (f >= 0) & inner
            lo[idx[ok]], f_lo[idx[ok]] = pt[ok], f[ok]
            hi[idx[bad]], f_hi[idx[bad]] = pt[bad], f[bad]
    else:  # pragma: no cover - bisection alone needs < 100 rounds
        raise NumericError("ray radius search did not converge")
    return 2.0 ** lo


def _quad(U, S):
    """``u^T S u`` for every stacked S and direction u: shape (N, D)."""
    return np.einsum("dn,knm,dm->kd", U, S, U)


def _lsq_shape(U, R):
    """Least-squares S with ``p^T S p = 1`` at the sampled boundary points ``p = R u``."""
    N, D = R.shape
    n = U.shape[1]
    iu = np.triu_indices(n)
    P = R[..., None] * U[None]
    F = P[..., iu[0]] * P[..., iu[1]] * np.where(iu[0] == iu[1], 1.0, 2.0)
    G = np.einsum("kdi,kdj->kij", F, F)
    h = F.sum(axis=1)
    coef = np.linalg.solve(G + 1e-300 * np.eye(len(iu[0])), h[..., None])[..., 0]
    S = np.zeros((N, n, n))
    S[:, iu[0], iu[1]] = coef
    S[:, iu[1], iu[0]] = coef
    w = np.linalg.eigvalsh(S)
    bad = ~(w[:, 0] > 0) | ~np.isfinite(w).all(axis=1)
    if bad.any():
        S[bad] = np.eye(n) / (R[bad].min(axis=1) ** 2)[:, None, None]
    return S


def _scale_feasible(U, R, S):
    """Scale each S so the ellipse fits inside the radii; return (S, Q)."""
    ratio = R * np.sqrt(_quad(U, S))  # R(u) / r_xi(u)
    f = ratio.min(axis=1)
    S = S / (f * f)[:, None, None]
    return S, ratio.max(axis=1) / f


def _givens(n, k, angle):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    i, j = pairs[k]
    G = np.broadcast_to(np.eye(n), angle.shape + (n, n)).copy()
    c, s = np.cos(angle), np.sin(angle)
    G[:, i, i] = c
    G[:, j, j] = c
    G[:, i, j] = -s
    G[:, j, i] = s
    return G


def _refine_shape(U, R, S0, temps=(0.1, 0.03, 0.01, 0.0), iters=24, starts=64):
    """Golden-section line searches for a larger inscribed ellipse.

    ``S = A^T G diag(exp(-2 l)) G^T A`` with ``A = S0^(1/2)``, Givens angles in G
    and log-axes ``l`` (the last fixed at 0; the scale is set by feasibility).
    """
    N, n = S0.shape[0], S0.shape[1]
    w, V = np.linalg.eigh(S0)
    A = np.einsum("kij,kj,klj->kil", V, np.sqrt(w), V)
    n_ang = n * (n - 1) // 2
    theta = np.zeros((N, n_ang + n - 1))

    def build(th):
        G = np.broadcast_to(np.eye(n), (N, n, n)).copy()
        for k in range(n_ang):
            G = G @ _givens(n, k, th[:, k])
        l = np.concatenate([th[:, n_ang:], np.zeros((N, 1))], axis=1)
        core = np.einsum("kij,kj,klj->kil", G, np.exp(-2.0 * l), G)
        return np.einsum("kji,kjl,klm->kim", A, core, A)

    def logvol(th, temp=0.0):
        S = build(th)
        g = np.log(R * np.sqrt(_quad(U, S)))
        if temp > 0:
            # soft minimum: smooths the kinks so line searches can follow ridges
            m = g.min(axis=1)
            f = m - temp * np.log(np.exp(-(g - m[:, None]) / temp).sum(axis=1))
        else:
            f = g.min(axis=1)
        return -0.5 * np.linalg.slogdet(S)[1] + n * f

    best = logvol(theta)
    # coarse multi-start: coordinate search alone stalls on the ridges of a max-min objective
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=n, spawn_key=(7,))))
    spread = np.concatenate([np.full(n_ang, math.pi / 2), np.full(n - 1, 2.0)])
    for _ in range(starts):
        cand = gen.uniform(-1.0, 1.0, theta.shape[1]) * spread + np.zeros_like(theta)
        val = logvol(cand)
        better = val > best
        theta[better] = cand[better]
        best = np.where(better, val, best)
    dim = theta.shape[1]
    for rnd, temp in enumerate(temps):
        best = logvol(theta, temp)
        # coordinate axes first, then random directions to slide along ridges
        dirs = list(np.eye(dim)) + list(gen.standard_normal((2 * dim, dim)))
        for v in dirs:
            v = v / np.linalg.norm(v) * spread / spread.max()
            width = math.pi / 4 * 0.5 ** rnd
            a = np.full(N, -width)
            b = np.full(N, width)
            c = b - GOLDEN * (b - a)
            d = a + GOLDEN * (b - a)

            def at(alpha):
                return logvol(theta + alpha[:, None] * v, temp)

            fc, fd = at(c), at(d)
            for _ in range(iters):
                left = fc > fd
                b = np.where(left, d, b)
                a = np.where(left, a, c)
                new_c = np.where(left, b - GOLDEN * (b - a), d)
                new_d = np.where(left, c, a + GOLDEN * (b - a))
                f_new = at(np.where(left, new_c, new_d))
                fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
                c, d = new_c, new_d
            alpha = 0.5 * (a + b)
            val = at(alpha)
            better = val > best
            theta[better] += alpha[better, None] * v
            best = np.where(better, val, best)
    return build(theta)


def inscribed_ellipsoids(metric: QuasiDistance, X, r, U=None, refine=True):
    """Batched centered inscribed ellipsoids of ``B(X[i], r[i])``.

    Returns ``(M, Q, R, U)``: shape matrices ``(N, n, n)``, the dilation factor
    ``max_u R(u) / r_xi(u)`` per ball, and the directional radii used.
    Rectangle balls use the ellipse with the rectangle half-widths, with the
    rectangle diagonals added to the direction set.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N, n = X.shape
    r = np.broadcast_to(np.asarray(r, dtype=float), (N,))
    U = default_directions(n) if U is None else np.asarray(U, dtype=float)
    rect = metric.rectangle(X, r)
    if rect is not None:
        # rectangle diagonals join the direction set of each ball
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n)).reshape(n, -1).T
        corners = signs[None] * rect[:, None, :]
        corners /= np.linalg.norm(corners, axis=2, keepdims=True)
        Ui = np.concatenate([np.broadcast_to(U, (N,) + U.shape), corners], axis=1)
        D = Ui.shape[1]
        R = ray_radii(metric, np.repeat(X, D, axis=0), np.repeat(r, D), Ui.reshape(-1, n)).reshape(N, D)
        # r_xi(u) = 1 / sqrt(sum (u_i / w_i)^2)
        Q = (R * np.sqrt(((Ui / rect[:, None, :]) ** 2).sum(axis=2))).max(axis=1)
        M = np.zeros((N, n, n))
        M[:, np.arange(n), np.arange(n)] = rect
        return M, Q, R[:, : len(U)], U
    R = directional_radii(metric, X, r, U)
    S, Q = _scale_feasible(U, R, _lsq_shape(U, R))
    if refine and np.any(Q > 1 + Q_EXACT_TOL):
        sel = np.flatnonzero(Q > 1 + Q_EXACT_TOL)
        S_ref, Q_ref = _scale_feasible(U, R[sel], _refine_shape(U, R[sel], S[sel]))
        vol_old = -0.5 * np.linalg.slogdet(S[sel])[1]
        vol_new = -0.5 * np.linalg.slogdet(S_ref)[1]
        take = vol_new > vol_old
        S[sel[take]] = S_ref[take]
        Q[sel[take]] = Q_ref[take]
    w, V = np.linalg.eigh(S)
    M = np.einsum("kij,kj,klj->kil", V, 1.0 / np.sqrt(w), V)
    return M, Q, R, U


def inscribed_centered_ellipsoid(metric: QuasiDistance, x, r, directions=None) -> Ellipsoid:
    """Centered ellipsoid inside ``B(x, r)`` of (approximately) maximal volume."""
    x = np.asarray(x, dtype=float).reshape(-1)
    M, _, _, _ = inscribed_ellipsoids(metric, x[None], np.array([float(r)]), directions)
    return Ellipsoid(M[0], x)


def _sample_balls(gen, size, n, box, log_r):
    X = sample_points(gen, size, n, box)
    r = 2.0 ** gen.uniform(*log_r, size)
    return X, r


def quasi_convexity_certify(metric: QuasiDistance, rng, samples=200, log_r=(-12.0, 6.0),
                            box=DEFAULT_BOX, directions=None, workers=1) -> CertReport:
    """Measure Q over sampled balls and verify the inscribed ellipse stays inside.

    The inner inclusion is checked on four times as many directions as the
    fit uses, at boundary points pulled in by ``BOUNDARY_RTOL``.
    """
    n = metric.dim
    U = default_directions(n) if directions is None else directions
    dense = quasi_uniform_directions(4 * len(U), n)

    def chunk(gen, size):
        X, r = _sample_balls(gen, size, n, box, log_r)
        M, Q, _, _ = inscribed_ellipsoids(metric, X, r, U)
        pts = np.einsum("kij,dj->kdi", M, dense) * (1 - BOUNDARY_RTOL) + X[:, None, :]
        Xr = np.repeat(X, len(dense), axis=0)
        inside = metric.pairs(Xr, pts.reshape(-1, n)) < np.repeat(r, len(dense))
        return X, r, Q, inside.reshape(size, -1).all(axis=1)

    X, r, Q, inner_ok = run_chunks(chunk, rng, samples, workers)
    worst = np.zeros(len(Q), dtype=bool)
    worst[int(np.argmax(Q))] = True
    bad = ~inner_ok
    return CertReport(
        "quasi_convexity",
        bool(not bad.any() and np.isfinite(Q).all()),
        constants={"Q": float(Q.max())},
        witnesses=witness_rows(bad, x=X, r=r, Q=Q),
        seed=as_rng(rng).seed,
        samples=int(samples),
        details={
            "directions": len(U),
            "inner_violations": int(bad.sum()),
            "Q_median": float(np.median(Q)),
            "extreme": witness_rows(worst, x=X, r=r, Q=Q)[0],
        },
    )


def inner_property_check(metric: QuasiDistance, a, b, rng, samples=10_000, lam_max=2.0 ** 10,
                         log_r=(-12.0, 6.0), box=DEFAULT_BOX, Q=None, ellipsoid_samples=256,
                         workers=1, boundary_rtol=BOUNDARY_RTOL) -> CertReport:
    """Check ``a lam^b (B(x, r) - x) ⊆ B(x, lam r) - x`` at boundary points of B(x, r).

    Boundary points are pulled in by the relative ``boundary_rtol``: for thin
    balls far from the origin, ``y - x`` loses that much to cancellation.

    With ``Q`` given, the ellipsoid form ``(a/Q) lam^b xi(x, r) ⊆ xi(x, lam r)``
    is also checked on the first ``ellipsoid_samples`` samples.
    """
    if not (a > 0 and b > 0):
        raise ContractError("inner property constants must be positive")
    n = metric.dim

    def chunk(gen, size):
        X, r = _sample_balls(gen, size, n, box, log_r)
        lam = 2.0 ** gen.uniform(0.0, math.log2(lam_max), size)
        u = gen.standard_normal((size, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        R = ray_radii(metric, X, r, u)
        y = X + (a * lam ** b * R * (1 - boundary_rtol))[:, None] * u
        ok = metric.pairs(X, y) < lam * r
        return X, r, lam, R, ok

    X, r, lam, R, ok = run_chunks(chunk, rng, samples, workers)
    bad = ~ok
    details = {"ball_violations": int(bad.sum()), "lam_max": lam_max, "boundary_rtol": boundary_rtol}
    if Q is not None and ellipsoid_samples > 0:
        m = min(ellipsoid_samples, len(X))
        M1, _, _, _ = inscribed_ellipsoids(metric, X[:m], r[:m])
        M2, _, _, _ = inscribed_ellipsoids(metric, X[:m], lam[:m] * r[:m])
        inner = ((a / Q) * lam[:m] ** b)[:, None, None] * M1
        zero = np.zeros((m, n))
        ell_bad = containment_ratios(inner, zero, M2, zero) > 1.0 + CONTAIN_TOL
        details["ellipsoid_violations"] = int(ell_bad.sum())
        details["ellipsoid_samples"] = m
        bad = bad.copy()
        bad[:m] |= ell_bad
    return CertReport(
        "inner_property",
        not bad.any(),
        constants={"a": float(a), "b": float(b)},
        witnesses=witness_rows(bad, x=X, r=r, lam=lam, radius=R),
        seed=as_rng(rng).seed,
        samples=int(samples),
        details=details,
    )


@dataclass(frozen=True)
class ConstantLedger:
    """Inputs c1, Q, kappa, n, c2 and the constants derived from them."""

    c1: float
    Q: float
    kappa: float
    n: int
    c2: float
    c3: float
    c: float
    d: float
    epsilon: float
    a: float
    b: float

    def as_dict(self):
        return asdict(self)


def derive_constants(c1, Q, kappa, n, c2=1.0) -> ConstantLedger:
    """Engulfing constant c and inner-property constants (a, b) from c1, Q, kappa.

    c3 = Q^n c1^2 c2,  c = Q^{2n} c1^2 3 kappa^2 c3,  (d - 1) c^{n-1} c1^2 Q^2 = 1,
    d = (2 kappa)^eps,  a = 1/d,  b = eps.
    """
    if min(c1, Q, kappa) < 1 or not c2 > 0 or int(n) != n or n < 1:
        raise ContractError("need c1, Q, kappa >= 1, c2 > 0 and integer n >= 1")
    c3 = Q ** n * c1 ** 2 * c2
    c = Q ** (2 * n) * c1 ** 2 * 3 * kappa ** 2 * c3
    d = 1.0 + c ** (1 - n) / (c1 ** 2 * Q ** 2)
    eps = math.log(d) / math.log(2 * kappa)
    return ConstantLedger(c1, Q, kappa, int(n), c2, c3, c, d, eps, 1.0 / d, eps)


class XiCover(Cover):
    """``theta(x, t) = xi(x, 2^-t)``: the inscribed ellipsoids of a metric's balls."""

    def __init__(self, metric: QuasiDistance, Q, c1, directions=None):
        n = metric.dim
        super().__init__(CoverParams(n, 1.0 / (Q ** n * c1), c1))
        self.metric = metric
        self.Q = Q
        self.c1 = c1
        self.U = default_directions(n) if directions is None else directions
        self.name = f"xi({metric.name})"

    def matrices(self, X, t):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r = 2.0 ** -np.broadcast_to(np.asarray(t, dtype=float), X.shape[:1])
        return inscribed_ellipsoids(self.metric, X, r, self.U)[0]

    def scale_guess(self, X, Y):
        with np.errstate(divide="ignore"):
            return -np.log2(self.metric.pairs(X, Y))


def build_xi_cover(metric: QuasiDistance, quasi_cert: CertReport, ahlfors_cert: CertReport,
                   directions=None) -> XiCover:
    """The cover of inscribed ellipsoids; needs passing quasi-convexity and Ahlfors reports."""
    for cert, name in ((quasi_cert, "quasi_convexity"), (ahlfors_cert, "ahlfors")):
        if cert is None or cert.name != name or not cert.passed:
            raise ContractError(f"build_xi_cover needs a passing {name} certificate")
    return XiCover(metric, quasi_cert.constants["Q"], ahlfors_cert.constants["c1"], directions)


def roundtrip_pairs(gen, size, n, box=DEFAULT_BOX, log_scale=(-10.0, 1.0)):
    X = sample_points(gen, size, n, box)
    d = gen.standard_normal((size, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return X, X + (2.0 ** gen.uniform(*log_scale, size))[:, None] * d


def _asymmetry(metric, X, Y):
    with np.errstate(divide="ignore", invalid="ignore"):
        return metric.pairs(Y, X) / metric.pairs(X, Y)


def _climb_asymmetry(metric, X, Y, sign, gen, steps):
    """Local random search pushing ``rho(y, x) / rho(x, y)`` down (sign -1) or up (+1)."""
    best = sign * _asymmetry(metric, X, Y)
    for i in range(steps):
        size = np.linalg.norm(Y - X, axis=1)[:, None] * 0.2 * 0.5 ** (4.0 * i / steps)
        Xc = X + size * gen.standard_normal(X.shape)
        Yc = Y + size * gen.standard_normal(Y.shape)
        val = sign * _asymmetry(metric, Xc, Yc)
        better = np.isfinite(val) & (val > best)
        X = np.where(better[:, None], Xc, X)
        Y = np.where(better[:, None], Yc, Y)
        best = np.where(better, val, best)
    return X, Y


def screen_pairs(metric: QuasiDistance, X, Y, keep, gen=None, climb=200):
    """Pick ``keep`` pairs: the most asymmetric under ``metric`` plus an even spread.

    The symmetric distance of a cover departs most from ``rho`` where ``rho``
    itself is most asymmetric, so those pairs pin down the ends of the ratio
    interval.  With a generator, the extreme pairs are first pushed further by
    local random search on the (cheap) asymmetry of ``rho``.
    """
    order = np.argsort(_asymmetry(metric, X, Y), kind="stable")
    q = keep // 4
    spread = order[np.linspace(0, len(order) - 1, keep - 2 * q).astype(int)]
    lo, hi = order[:q], order[len(order) - q:]
    if gen is None or climb == 0:
        idx = np.concatenate([lo, hi, spread])
        return X[idx], Y[idx]
    Xl, Yl = _climb_asymmetry(metric, X[lo], Y[lo], -1.0, gen, climb)
    Xh, Yh = _climb_asymmetry(metric, X[hi], Y[hi], 1.0, gen, climb)
    return np.concatenate([Xl, Xh, X[spread]]), np.concatenate([Yl, Yh, Y[spread]])


def roundtrip_equivalence(metric: QuasiDistance, xi: XiCover, rng, pairs=500, seeds=3, kappa=None,
                          pool=100_000, rel_agree=0.05, rtol=1e-6, box=DEFAULT_BOX, workers=1) -> CertReport:
    """Compare ``rho_Xi`` (one-sided min form on Xi) with ``rho`` on sampled pairs.

    Each of ``seeds`` independent streams draws ``pool`` pairs, keeps
    ``pairs`` of them (see :func:`screen_pairs`) and yields a ratio interval
    ``[min, max]`` of ``rho_Xi / rho``.  The report passes when the intervals
    agree within ``rel_agree`` and ``rho / rho_Xi <= 4 c1 kappa Q^n`` everywhere.
    """
    rng = as_rng(rng)
    n = metric.dim
    if kappa is None:
        raise ContractError("roundtrip_equivalence needs the triangle constant kappa")
    bound = 4.0 * xi.c1 * kappa * xi.Q ** n
    intervals = []
    witnesses = []
    per_seed = []
    ratios = []
    for s in range(seeds):
        X, Y = run_chunks(lambda g, k: roundtrip_pairs(g, k, n, box), rng.child(s), max(pool, pairs), workers)
        X, Y = screen_pairs(metric, X, Y, pairs, rng.child(s, 1).generator())
        rho = metric.pairs(X, Y)
        rho_xi = rho_induced(xi, X, Y, rtol=rtol)
        ratio = rho_xi / rho
        ratios.append(ratio)
        lo, hi = float(ratio.min()), float(ratio.max())
        intervals.append((lo, hi))
        over = rho / rho_xi > bound
        witnesses += witness_rows(over, x=X, y=Y, rho=rho, rho_xi=rho_xi)
        per_seed.append({
            "min": lo,
            "max": hi,
            "median": float(np.median(ratio)),
            "pairs": int(len(ratio)),
            "max_rho_over_rho_xi": float(np.max(rho / rho_xi)),
        })
    lows = np.array([i[0] for i in intervals])
    highs = np.array([i[1] for i in intervals])
    agree = bool(lows.max() <= lows.min() * (1 + rel_agree) and highs.max() <= highs.min() * (1 + rel_agree))
    passed = agree and not witnesses and np.isfinite(highs).all() and (lows > 0).all()
    return CertReport(
        "roundtrip",
        bool(passed),
        constants={
            "ratio_min": float(lows.min()),
            "ratio_max": float(highs.max()),
            "upper_bound": bound,
        },
        witnesses=witnesses,
        seed=rng.seed,
        samples=int(sum(p["pairs"] for p in per_seed)),
        details={
            "per_seed": per_seed,
            "seeds_agree": agree,
            "rel_agree": rel_agree,
            "pool": int(pool),
            "percentiles": dict(zip(("p0", "p5", "p50", "p95", "p100"),
                                    np.percentile(np.concatenate(ratios), [0, 5, 50, 95, 100]).tolist())),
        },
    )


def xi_engulf(xi: XiCover, rng, samples=500, box=DEFAULT_BOX, workers=1) -> CertReport:
    """Engulfing constant of Xi at dilation Q, used in the bound rho_Xi <= a2 2^{cQ} rho."""
    return engulf_constant(xi, rng, samples, lam_range=(xi.Q, xi.Q), box=box, workers=workers)
