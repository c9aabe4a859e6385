"""Monte Carlo ball volumes, triangle constants and Ahlfors-regularity checks."""
from statistics import NormalDist

import numpy as np

from .errors import ConfigError
from .metrics import QuasiDistance
from .report import CertReport, witness_rows
from .streams import as_rng, map_tasks, run_chunks
from .validators import DEFAULT_BOX, sample_points

BOX_MARGIN = 1.25
CONFIDENCE = 0.99
RADIUS_LADDER = tuple(2.0 ** j for j in range(-12, 7))
DIVERGENCE_SLOPE = 0.25


def _z(confidence=CONFIDENCE):
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def _box_for(metric: QuasiDistance, x, r, box):
    if box is not None:
        half = np.asarray(box, dtype=float).reshape(-1)
    else:
        half = metric.box(np.asarray(x, float)[None], np.asarray([r], float))
        if half is None:
            raise ConfigError(f"metric {metric.name} has no analytic bounding box; pass box=")
        half = BOX_MARGIN * half[0]
    if half.shape != (metric.dim,) or np.any(~np.isfinite(half)) or np.any(half <= 0):
        raise ConfigError("bounding box must have positive finite half-widths")
    return half


def ball_volume_mc(metric: QuasiDistance, x, r, rng, N=100_000, box=None):
    """Hit-ratio estimate of ``|B(x, r)|`` over a bounding box.

    Returns ``(estimate, ci)`` where ``ci`` is the half-width of a 99% Wilson
    interval, converted to volume units.  ``box`` overrides the metric's box
    (half-widths); the metric box is padded by 25% so the estimate is not
    trivially exact.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    half = _box_for(metric, x, r, box)
    gen = as_rng(rng).generator() if not isinstance(rng, np.random.Generator) else rng
    pts = x + gen.uniform(-1.0, 1.0, (int(N), metric.dim)) * half
    hits = int(np.count_nonzero(metric.contains(np.broadcast_to(x, pts.shape), r, pts)))
    box_vol = float(np.prod(2.0 * half))
    p = hits / N
    z = _z()
    denom = 1.0 + z * z / N
    center = (p + z * z / (2 * N)) / denom
    hw = z / denom * np.sqrt(p * (1 - p) / N + z * z / (4 * N * N))
    return box_vol * p, box_vol * (hw + abs(center - p))


def triangle_constant(metric: QuasiDistance, rng, samples=10_000, box=DEFAULT_BOX,
                      log_scale=(-12.0, 2.0), workers=1, refine=300, refine_starts=64) -> CertReport:
    """``max rho(x, z) / (rho(x, y) + rho(y, z))`` over sampled triples.

    Two thirds of the triples put y on or near the segment [x, z], where the
    ratio is largest for power-type distances; the rest scatter y around x.  The ``refine_starts``
    worst triples are then improved by ``refine`` rounds of local random search,
    since extreme triples occupy thin regions of configuration space.
    """
    n = metric.dim

    def chunk(gen, size):
        X = sample_points(gen, size, n, box)
        d = gen.standard_normal((size, n))
        # a quarter of the directions along a coordinate axis
        axis = np.eye(n)[gen.integers(0, n, size)] * np.sign(d)
        d = np.where((gen.random(size) < 0.25)[:, None], axis, d)
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        scale = 2.0 ** gen.uniform(*log_scale, size)
        Z = X + scale[:, None] * d
        tau = gen.random(size)
        on_seg = X + tau[:, None] * (Z - X)
        near = on_seg + 0.05 * scale[:, None] * gen.standard_normal((size, n))
        wide = X + 2.0 * scale[:, None] * gen.standard_normal((size, n))
        pick = gen.integers(0, 3, size)[:, None]
        Y = np.where(pick == 0, on_seg, np.where(pick == 1, near, wide))
        return X, Y, Z

    X, Y, Z = run_chunks(chunk, rng, samples, workers)
    ratio = _triangle_ratio(metric, X, Y, Z)
    running = np.maximum.accumulate(ratio)
    sampled = float(running[-1])

    if refine > 0:
        top = np.argsort(ratio, kind="stable")[-refine_starts:]
        X, Y, Z, ratio = _refine_triples(metric, X[top], Y[top], Z[top], ratio[top],
                                         as_rng(rng).child(1 << 20).generator(), refine)
    j = int(np.argmax(ratio))
    mask = np.zeros(len(ratio), dtype=bool)
    mask[j] = True
    kappa = max(sampled, float(ratio[j]))
    return CertReport(
        "triangle",
        bool(np.isfinite(kappa)),
        constants={"kappa": kappa},
        witnesses=[],
        seed=as_rng(rng).seed,
        samples=int(samples),
        details={
            "kappa_sampled": sampled,
            "kappa_at_tenth": float(running[max(len(running) // 10 - 1, 0)]),
            "refine_steps": int(refine),
            "extreme": witness_rows(mask, x=X, y=Y, z=Z, ratio=ratio)[0],
        },
    )


def _triangle_ratio(metric, X, Y, Z):
    num = metric.pairs(X, Z)
    den = metric.pairs(X, Y) + metric.pairs(Y, Z)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def _refine_triples(metric, X, Y, Z, ratio, gen, steps):
    """Random-perturbation hill climbing on the worst triples."""
    for i in range(steps):
        size = np.linalg.norm(Z - X, axis=1)[:, None] * 0.2 * 0.5 ** (4.0 * i / steps)
        cand = [P + size * gen.standard_normal(P.shape) for P in (X, Y, Z)]
        # sometimes move only the middle point
        only_y = (gen.random(len(X)) < 0.5)[:, None]
        cand[0] = np.where(only_y, X, cand[0])
        cand[2] = np.where(only_y, Z, cand[2])
        r = _triangle_ratio(metric, *cand)
        better = r > ratio
        X = np.where(better[:, None], cand[0], X)
        Y = np.where(better[:, None], cand[1], Y)
        Z = np.where(better[:, None], cand[2], Z)
        ratio = np.where(better, r, ratio)
    return X, Y, Z, ratio


def ahlfors_certify(metric: QuasiDistance, rng, centers=8, radii=RADIUS_LADDER, mc_points=20_000,
                    box=DEFAULT_BOX, anchor=None, workers=1) -> CertReport:
    """Estimate ``c1`` with ``r / c1 <= |B(x, r)| <= c1 r`` or report divergence.

    Centers are an anchor (the origin by default) plus random points.  For each
    center, ``log2(|B| / r)`` is regressed on ``log2 r``; a slope of magnitude
    at least 0.25 over the radius ladder is reported as divergence, with the
    factor by which the ratio changes per decade of r.
    """
    rng = as_rng(rng)
    n = metric.dim
    gen = rng.child(0).generator()
    C = sample_points(gen, centers, n, box)
    C = np.vstack([np.zeros(n) if anchor is None else np.asarray(anchor, float), C])
    radii = np.asarray(radii, dtype=float)
    tasks = [(i, j) for i in range(len(C)) for j in range(len(radii))]

    def job(k, g):
        i, j = tasks[k]
        return ball_volume_mc(metric, C[i], radii[j], g, mc_points)

    est = map_tasks(job, rng.child(1), len(tasks), workers)
    vol = np.array([e for e, _ in est]).reshape(len(C), len(radii))
    ci = np.array([c for _, c in est]).reshape(len(C), len(radii))
    ratio = vol / radii
    lr = np.log2(radii)

    rows = []
    divergent = []
    for i in range(len(C)):
        ok = ratio[i] > 0
        if ok.sum() >= 2:
            slope = float(np.polyfit(lr[ok], np.log2(ratio[i, ok]), 1)[0])
        else:
            slope = float("inf")
        per_decade = 10.0 ** abs(slope) if np.isfinite(slope) else float("inf")
        rows.append({"center": C[i], "slope": slope, "factor_per_decade": per_decade})
        if not np.isfinite(slope) or abs(slope) >= DIVERGENCE_SLOPE:
            divergent.append({
                "center": C[i],
                "slope": slope,
                "factor_per_decade": per_decade,
                "ratio_small_r": ratio[i, 0],
                "ratio_large_r": ratio[i, -1],
            })
    positive = ratio[ratio > 0]
    c1 = float(np.max(np.maximum(positive, 1.0 / positive))) if positive.size else float("inf")
    if (ratio <= 0).any():
        c1 = float("inf")
    return CertReport(
        "ahlfors",
        not divergent,
        constants={"c1": c1},
        witnesses=divergent,
        seed=rng.seed,
        samples=int(ratio.size),
        details={
            "radii": radii,
            "per_center": rows,
            "ratio": ratio,
            "ci_over_r": ci / radii,
            "mc_points": int(mc_points),
        },
    )
