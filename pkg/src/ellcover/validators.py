"""Monte Carlo validators for the volume and shape conditions of a cover.

Every validator draws its samples through :func:`ellcover.streams.run_chunks`,
so a report depends on the seed and sample count but not on the worker count.
"""
from dataclasses import dataclass
import math

import numpy as np

from .covers import Cover, theta0_axes, theta0_regime
from .errors import ContractError, NumericError
from .geometry import CONTAIN_TOL, containment_ratios, gap_ratios
from .numeric import spectral_norms
from .report import CertReport, witness_rows
from .streams import as_rng, run_chunks, unit_ball

REL_SLACK = 1e-9


@dataclass(frozen=True)
class SamplingBox:
    """Where samples are drawn.

    Coordinates are uniform on ``[-box, box]`` with probability
    ``1 - log_fraction``, otherwise ``±2^u`` with ``u`` uniform on ``log_range``,
    which reaches the thin regimes near coordinate axes.
    """

    box: float = 4.0
    t_range: tuple = (-8.0, 24.0)
    s_range: tuple = (0.0, 12.0)
    log_fraction: float = 0.5
    log_range: tuple = (-16.0, 2.0)

    def __post_init__(self):
        if self.box <= 0 or not 0 <= self.log_fraction <= 1:
            raise ContractError("invalid sampling box")
        if self.t_range[0] > self.t_range[1] or not 0 <= self.s_range[0] <= self.s_range[1]:
            raise ContractError("invalid scale ranges")


DEFAULT_BOX = SamplingBox()


def sample_points(gen, size, n, box=DEFAULT_BOX):
    uniform = gen.uniform(-box.box, box.box, (size, n))
    mags = 2.0 ** gen.uniform(*box.log_range, (size, n))
    signs = np.where(gen.random((size, n)) < 0.5, -1.0, 1.0)
    pick = gen.random((size, n)) < box.log_fraction
    return np.where(pick, signs * mags, uniform)


def sample_intersecting_pairs(cover: Cover, gen, size, box=DEFAULT_BOX, max_rounds=64):
    """Rows ``(X, t, Y, s, Mx, My)`` with theta(X, t) meeting theta(Y, t + s)."""
    n = cover.dim
    cols = [[] for _ in range(6)]
    have = 0
    for _ in range(max_rounds):
        X = sample_points(gen, size, n, box)
        t = gen.uniform(*box.t_range, size)
        s = gen.uniform(*box.s_range, size)
        Mx = cover.matrices(X, t)
        Y = X + 1.5 * np.einsum("kij,kj->ki", Mx, unit_ball(gen, size, n))
        My = cover.matrices(Y, t + s)
        ok = gap_ratios(Mx, X, My, Y) <= 1.0 + CONTAIN_TOL
        for col, arr in zip(cols, (X, t, Y, s, Mx, My)):
            col.append(arr[ok])
        have += int(ok.sum())
        if have >= size:
            return tuple(np.concatenate(c)[:size] for c in cols)
    raise NumericError("could not draw enough intersecting pairs")


def _pair_norms(Mx, My):
    up = spectral_norms(np.linalg.solve(Mx, My))
    down = spectral_norms(np.linalg.solve(My, Mx))
    return up, 1.0 / down


def validate_volume(cover: Cover, rng, samples=10_000, box=DEFAULT_BOX, workers=1) -> CertReport:
    """Check a1 2^-t <= |theta(x, t)| <= a2 2^-t and report the observed range."""
    p = cover.params

    def chunk(gen, size):
        X = sample_points(gen, size, cover.dim, box)
        t = gen.uniform(*box.t_range, size)
        return X, t, cover.volumes(X, t) * 2.0 ** t

    X, t, scaled = run_chunks(chunk, rng, samples, workers)
    bad = (scaled < p.a1 * (1 - 1e-12)) | (scaled > p.a2 * (1 + 1e-12))
    return CertReport(
        "volume",
        not bad.any(),
        constants={"a1": float(scaled.min()), "a2": float(scaled.max())},
        witnesses=witness_rows(bad, x=X, t=t, scaled_volume=scaled),
        seed=as_rng(rng).seed,
        samples=int(samples),
        details={"declared": {"a1": p.a1, "a2": p.a2}, "violations": int(bad.sum())},
    )


def envelope_fit(s, y, upper, bin_width=0.5):
    """Line ``y = c + m s`` supporting all points from above (``upper``) or below.

    The slope is the chord through the extreme points of the first and last
    bins in ``s``; the intercept is then moved until every point is on the
    correct side.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    bins = np.floor(s / bin_width).astype(int)
    first, last = bins.min(), bins.max()

    def extreme(b):
        sel = np.flatnonzero(bins == b)
        j = sel[np.argmax(y[sel])] if upper else sel[np.argmin(y[sel])]
        return s[j], y[j]

    if first == last:
        slope = 0.0
    else:
        (s0, y0), (s1, y1) = extreme(first), extreme(last)
        slope = (y1 - y0) / (s1 - s0)
    resid = y - slope * s
    return float(resid.max() if upper else resid.min()), float(slope)


def validate_shape_norm(cover: Cover, rng, samples=10_000, box=DEFAULT_BOX, workers=1,
                        bin_width=0.5, pairs=None) -> CertReport:
    """Estimate a3..a6 from ||M_x^-1 M_y|| and 1/||M_y^-1 M_x|| over intersecting pairs.

    The report fails when a declared constant is violated by some pair or when
    the fitted upper envelope does not decay (a6 <= 0).
    """
    if pairs is None:
        pairs = run_chunks(lambda g, k: sample_intersecting_pairs(cover, g, k, box), rng, samples, workers)
    X, t, Y, s, Mx, My = pairs
    up, low = _pair_norms(Mx, My)
    chain_bad = low > up * (1 + REL_SLACK)

    c_up, m_up = envelope_fit(s, np.log2(up), True, bin_width)
    c_low, m_low = envelope_fit(s, np.log2(low), False, bin_width)
    a5, a6 = 2.0 ** c_up, -m_up
    a3, a4 = 2.0 ** c_low, -m_low
    a4 = max(a4, a6)
    fitted = {"a3": a3, "a4": a4, "a5": a5, "a6": a6}

    p = cover.params
    declared_bad = np.zeros(len(s), dtype=bool)
    if p.has_shape:
        declared_bad = (up > p.a5 * 2.0 ** (-p.a6 * s) * (1 + REL_SLACK)) | (
            low < p.a3 * 2.0 ** (-p.a4 * s) * (1 - REL_SLACK)
        )
    # reversed form: (1/a5) 2^{a6 s} <= 1/up and 1/low <= (1/a3) 2^{a4 s}
    rev_bad = (1.0 / up < (1.0 / a5) * 2.0 ** (a6 * s) * (1 - REL_SLACK)) | (
        1.0 / low > (1.0 / a3) * 2.0 ** (a4 * s) * (1 + REL_SLACK)
    )
    bad = chain_bad | declared_bad | rev_bad
    passed = a6 > 0 and not bad.any()
    return CertReport(
        "shape_norm",
        bool(passed),
        constants={"a1": p.a1, "a2": p.a2, **fitted},
        witnesses=witness_rows(bad, x=X, t=t, y=Y, s=s, upper=up, lower=low),
        seed=as_rng(rng).seed,
        samples=int(len(s)),
        details={
            "declared": p.as_dict(),
            "declared_violations": int(declared_bad.sum()),
            "chain_violations": int(chain_bad.sum()),
            "reversed_violations": int(rev_bad.sum()),
            "max_s": float(s.max()),
            "decays": bool(a6 > 0),
        },
    )


def validate_shape_geometric(cover: Cover, rng, samples=10_000, a4=None, a6=None, a3p=None, a5p=None,
                             box=DEFAULT_BOX, workers=1, pairs=None) -> CertReport:
    """Check a3' v^a4 (xi - c) ⊆ eta - c ⊆ a5' v^a6 (xi - c) with v = |eta|/|xi| <= 1.

    Missing a3', a5' are replaced by their tightest values on the sample,
    missing a4, a6 by the declared ones.
    """
    p = cover.params
    a4 = p.a4 if a4 is None else a4
    a6 = p.a6 if a6 is None else a6
    if a4 is None or a6 is None:
        raise ContractError("geometric validation needs exponents a4, a6")
    if pairs is None:
        pairs = run_chunks(lambda g, k: sample_intersecting_pairs(cover, g, k, box), rng, samples, workers)
    X, t, Y, s, Mx, My = pairs
    vx = np.abs(np.linalg.det(Mx))
    vy = np.abs(np.linalg.det(My))
    swap = vy > vx
    M_xi = np.where(swap[:, None, None], My, Mx)
    M_eta = np.where(swap[:, None, None], Mx, My)
    v = np.minimum(vx, vy) / np.maximum(vx, vy)

    inner_norm = 1.0 / spectral_norms(np.linalg.solve(M_eta, M_xi))
    outer_norm = spectral_norms(np.linalg.solve(M_xi, M_eta))
    a3p_tight = float(np.min(inner_norm / v ** a4))
    a5p_tight = float(np.max(outer_norm / v ** a6))
    a3p_used = a3p_tight * (1 - REL_SLACK) if a3p is None else a3p
    a5p_used = a5p_tight * (1 + REL_SLACK) if a5p is None else a5p

    zero = np.zeros((len(v), cover.dim))
    inner = (a3p_used * v ** a4)[:, None, None] * M_xi
    outer = (a5p_used * v ** a6)[:, None, None] * M_xi
    inner_bad = containment_ratios(inner, zero, M_eta, zero) > 1.0 + CONTAIN_TOL
    outer_bad = containment_ratios(M_eta, zero, outer, zero) > 1.0 + CONTAIN_TOL
    bad = inner_bad | outer_bad
    return CertReport(
        "shape_geometric",
        not bad.any(),
        constants={"a3_prime": a3p_used, "a5_prime": a5p_used, "a4": a4, "a6": a6},
        witnesses=witness_rows(bad, x=X, t=t, y=Y, s=s, volume_ratio=v),
        seed=as_rng(rng).seed,
        samples=int(len(v)),
        details={
            "tightest": {"a3_prime": a3p_tight, "a5_prime": a5p_tight},
            "inner_violations": int(inner_bad.sum()),
            "outer_violations": int(outer_bad.sum()),
        },
    )


def _bisect_min_shift(holds, lo, hi, iters=50):
    """Smallest ``c`` in ``[lo, hi]`` with ``holds(c)`` for a monotone predicate (vectorised)."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = holds(mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return hi


def engulf_constant(cover: Cover, rng, samples=10_000, lam_range=(1.0, 32.0), c_check=None,
                    box=DEFAULT_BOX, workers=1, c_max=1024.0) -> CertReport:
    """Smallest c with lam·theta(x, t) ⊆ theta(x, t - c lam), maximised over samples.

    With ``c_check`` the inclusion is also verified at that fixed constant.
    """
    n = cover.dim

    def chunk(gen, size):
        X = sample_points(gen, size, n, box)
        t = gen.uniform(*box.t_range, size)
        lam = 2.0 ** gen.uniform(math.log2(lam_range[0]), math.log2(lam_range[1]), size)
        return X, t, lam

    X, t, lam = run_chunks(chunk, rng, samples, workers)
    inner = lam[:, None, None] * cover.matrices(X, t)

    def holds(c):
        return containment_ratios(inner, X, cover.matrices(X, t - c * lam), X) <= 1.0 + CONTAIN_TOL

    hi = np.ones(len(t))
    for _ in range(12):
        ok = holds(hi)
        if ok.all():
            break
        hi = np.where(ok, hi, np.minimum(2 * hi, c_max))
    unresolved = ~holds(hi)
    c_needed = _bisect_min_shift(holds, np.zeros(len(t)), hi)
    c_needed[unresolved] = np.inf
    details = {"unresolved": int(unresolved.sum()), "lambda_range": list(lam_range)}
    bad = unresolved
    if c_check is not None:
        check_bad = ~holds(np.full(len(t), float(c_check)))
        details["c_check"] = float(c_check)
        details["c_check_violations"] = int(check_bad.sum())
        bad = bad | check_bad
    return CertReport(
        "engulf",
        not bad.any(),
        constants={"c": float(c_needed.max())},
        witnesses=witness_rows(bad, x=X, t=t, lam=lam, c_needed=c_needed),
        seed=as_rng(rng).seed,
        samples=int(samples),
        details=details,
    )


def union_engulf(cover: Cover, rng, samples=10_000, c=None, a4=None, a5=None,
                 box=DEFAULT_BOX, workers=1, pairs=None, l_max=256.0) -> CertReport:
    """Smallest shift l with theta(x, t) ∪ theta(y, t + s) ⊆ theta(x, t - l).

    Reports the observed maximum together with the two candidate closed forms
    ``(1 + 2 a5) c`` and ``(1 + a4) c`` when ``c`` and the constants are known,
    and checks ``theta(y, t+s) ⊆ (1 + 2 a5) theta(x, t)``.
    """
    p = cover.params
    a4 = p.a4 if a4 is None else a4
    a5 = p.a5 if a5 is None else a5
    if pairs is None:
        pairs = run_chunks(lambda g, k: sample_intersecting_pairs(cover, g, k, box), rng, samples, workers)
    X, t, Y, s, Mx, My = pairs

    def holds(ell):
        M = cover.matrices(X, t - ell)
        return (containment_ratios(My, Y, M, X) <= 1.0 + CONTAIN_TOL) & (
            containment_ratios(Mx, X, M, X) <= 1.0 + CONTAIN_TOL
        )

    hi = np.ones(len(t))
    for _ in range(10):
        ok = holds(hi)
        if ok.all():
            break
        hi = np.where(ok, hi, np.minimum(2 * hi, l_max))
    unresolved = ~holds(hi)
    ell = _bisect_min_shift(holds, np.zeros(len(t)), hi)
    ell[unresolved] = np.inf
    s_star = float(ell.max())

    constants = {"s_star": s_star}
    details = {"unresolved": int(unresolved.sum())}
    bad = unresolved
    if a5 is not None:
        dil = containment_ratios(My, Y, Mx, X)
        dil_bad = dil > (1 + 2 * a5) * (1 + REL_SLACK)
        details["dilation_max"] = float(dil.max())
        details["dilation_violations"] = int(dil_bad.sum())
        bad = bad | dil_bad
    if c is not None:
        if a5 is not None:
            constants["s_star_dilation_form"] = (1 + 2 * a5) * c
        if a4 is not None:
            constants["s_star_exponent_form"] = (1 + a4) * c
    return CertReport(
        "union_engulf",
        not bad.any(),
        constants=constants,
        witnesses=witness_rows(bad, x=X, t=t, y=Y, s=s, shift=ell),
        seed=as_rng(rng).seed,
        samples=int(len(t)),
        details=details,
    )


# Theta0 regime-pair bounds.  Case 1: x in the middle regime at t, y in the
# flat regime at t+s.  Case 2: the other way round.
THETA0_CASES = {
    1: (3.0, 1.0 / 3, 3.0, -2.0 / 3),
    2: (3.0, 1.0 / 6, 3.0, -5.0 / 6),
}


def theta0_case_bounds(case, s):
    """``(upper, inverse)`` bound curves: ||M_x^-1 M_y|| <= c 2^{-e s}, ||M_y^-1 M_x|| <= c' 2^{-e' s}."""
    cu, eu, cd, ed = THETA0_CASES[case]
    s = np.asarray(s, dtype=float)
    return cu * 2.0 ** (-eu * s), cd * 2.0 ** (-ed * s)


def theta0_case_pairs(gen, size, case, t_range=(1.0, 30.0), s_range=(0.0, 12.0), max_rounds=200):
    """Intersecting pairs with x, y in the regimes of the given case."""
    want_x, want_y = (2, 3) if case == 1 else (3, 2)
    cols = [[] for _ in range(4)]
    have = 0
    for _ in range(max_rounds):
        t = gen.uniform(*t_range, size)
        s = gen.uniform(*s_range, size)
        # |x2| log-uniform across the relevant band
        if want_x == 2:
            lo, hi = -t / 2, -t / 3
        else:
            lo, hi = -t / 2 - 6.0, -t / 2
        x2 = 2.0 ** gen.uniform(lo, hi) * np.where(gen.random(size) < 0.5, -1.0, 1.0)
        X = np.stack([gen.uniform(-2, 2, size), x2], axis=1)
        s1, s2 = theta0_axes(x2, t)
        # y2 placed inside the band that puts y in its regime at t + s
        ts = t + s
        if want_y == 3:
            ylo, yhi = -ts / 2 - 6.0, -ts / 2
        else:
            ylo, yhi = -ts / 2, -ts / 3
        y2 = 2.0 ** gen.uniform(ylo, yhi) * np.sign(x2)
        y1 = X[:, 0] + s1 * gen.uniform(-1, 1, size)
        Y = np.stack([y1, y2], axis=1)
        ok = (theta0_regime(x2, t) == want_x) & (theta0_regime(y2, ts) == want_y)
        Mx = np.zeros((size, 2, 2))
        Mx[:, 0, 0], Mx[:, 1, 1] = s1, s2
        ty1, ty2 = theta0_axes(y2, ts)
        My = np.zeros((size, 2, 2))
        My[:, 0, 0], My[:, 1, 1] = ty1, ty2
        ok &= gap_ratios(Mx, X, My, Y) <= 1.0 + CONTAIN_TOL
        for col, arr in zip(cols, (X, t, Y, s)):
            col.append(arr[ok])
        have += int(ok.sum())
        if have >= size:
            return tuple(np.concatenate(c)[:size] for c in cols)
    raise NumericError(f"could not draw enough case-{case} pairs")


def theta0_case_check(cover, rng, samples=10_000, workers=1) -> CertReport:
    """Check the two regime-pair norm bounds of the theta0 cover."""
    rng = as_rng(rng)
    results = {}
    witnesses = []
    passed = True
    for case in (1, 2):
        X, t, Y, s = run_chunks(lambda g, k: theta0_case_pairs(g, k, case), rng.child(case), samples, workers)
        Mx = cover.matrices(X, t)
        My = cover.matrices(Y, t + s)
        up = spectral_norms(np.linalg.solve(Mx, My))
        down = spectral_norms(np.linalg.solve(My, Mx))
        bu, bd = theta0_case_bounds(case, s)
        bad = (up > bu * (1 + REL_SLACK)) | (down > bd * (1 + REL_SLACK))
        passed &= not bad.any()
        results[f"case{case}"] = {
            "max_upper_ratio": float(np.max(up / bu)),
            "max_inverse_ratio": float(np.max(down / bd)),
            "violations": int(bad.sum()),
        }
        witnesses += witness_rows(bad, x=X, t=t, y=Y, s=s, upper=up, inverse=down)
    return CertReport("theta0_cases", bool(passed), constants={}, witnesses=witnesses,
                      seed=rng.seed, samples=2 * int(samples), details=results)
