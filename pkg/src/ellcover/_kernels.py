"""Compiled inner loops.

Everything here takes and returns plain numpy arrays and scalars so that the
same source runs under numba and as interpreted Python (see ``_accel``).
Failure is signalled through boolean flags; the public wrappers turn those
into exceptions.
"""
import math

import numpy as np

from ._accel import njit

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
SECULAR_MAX_ITER = 200


@njit
def jacobi_eigh(S):
    """Cyclic Jacobi eigensolver for a small symmetric matrix.

    Returns (eigenvalues descending, eigenvectors as columns, converged).
    """
    n = S.shape[0]
    A = np.empty((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        V[i, i] = 1.0
        for j in range(n):
            A[i, j] = 0.5 * (S[i, j] + S[j, i])
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += A[i, j] * A[i, j]
    fro = math.sqrt(fro)
    converged = False
    for _sweep in range(JACOBI_MAX_SWEEPS + 1):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * A[p, q] * A[p, q]
        if math.sqrt(off) <= JACOBI_TOL * fro:
            converged = True
            break
        if _sweep == JACOBI_MAX_SWEEPS:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i]
    order = np.argsort(-w)
    w_sorted = np.empty(n)
    V_sorted = np.empty((n, n))
    for j in range(n):
        w_sorted[j] = w[order[j]]
        for i in range(n):
            V_sorted[i, j] = V[i, order[j]]
    return w_sorted, V_sorted, converged


@njit
def jacobi_eigh_batch(S):
    m = S.shape[0]
    n = S.shape[1]
    W = np.empty((m, n))
    Vs = np.empty((m, n, n))
    ok = np.empty(m, dtype=np.bool_)
    for i in range(m):
        w, V, conv = jacobi_eigh(S[i])
        W[i] = w
        Vs[i] = V
        ok[i] = conv
    return W, Vs, ok


@njit
def gram(A):
    n = A.shape[0]
    m = A.shape[1]
    H = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            acc = 0.0
            for k in range(n):
                acc += A[k, i] * A[k, j]
            H[i, j] = acc
            H[j, i] = acc
    return H


@njit
def spectral_norm_kernel(A):
    w, _V, ok = jacobi_eigh(gram(A))
    return math.sqrt(max(w[0], 0.0)), ok


@njit
def spectral_norm_batch(A):
    m = A.shape[0]
    out = np.empty(m)
    ok = np.empty(m, dtype=np.bool_)
    for i in range(m):
        out[i], ok[i] = spectral_norm_kernel(A[i])
    return out, ok


@njit
def _secular_root(w, gt, lo, hi):
    """Root of sum gt_i^2 / (mu - w_i)^2 = 1 on the bracket (lo, hi].

    All poles w_i must lie at or left of ``lo``.  Newton runs on
    1/sqrt(phi) - 1, which is increasing and concave in mu, with a bisection
    fallback whenever the step leaves the bracket.
    """
    n = w.shape[0]
    mu = hi
    ok = False
    psi = 1.0
    scale = max(abs(lo), abs(hi), 1e-300)
    for _it in range(SECULAR_MAX_ITER):
        phi = 0.0
        dphi = 0.0
        for i in range(n):
            den = mu - w[i]
            if gt[i] != 0.0:
                q = gt[i] * gt[i] / (den * den)
                phi += q
                dphi += q / den
        if phi == 0.0:
            ok = True
            break
        nrm = math.sqrt(phi)
        psi = 1.0 / nrm - 1.0
        if psi > 0.0:
            hi = mu
        elif psi < 0.0:
            lo = mu
        else:
            ok = True
            break
        if abs(psi) <= 1e-15 or hi - lo <= 4e-16 * scale:
            ok = True
            break
        dpsi = dphi / (phi * nrm)
        step = mu - psi / dpsi if dpsi > 0.0 else 0.5 * (lo + hi)
        if not (lo < step < hi):
            step = 0.5 * (lo + hi)
        mu = step
    if not ok:
        ok = abs(psi) <= 1e-10
    return mu, ok


@njit
def _argmax_sphere(w, gt, gnorm):
    n = w.shape[0]
    ut = np.zeros(n)
    w0 = w[0]
    scale = max(abs(w0), gnorm, 1e-300)
    tol_e = 1e-12 * scale
    gtop2 = 0.0
    for i in range(n):
        if w[i] >= w0 - tol_e:
            gtop2 += gt[i] * gt[i]
    if gtop2 <= (1e-13 * gnorm) ** 2:
        s_other = 0.0
        for i in range(n):
            if w[i] < w0 - tol_e:
                v = gt[i] / (w0 - w[i])
                s_other += v * v
        if s_other <= 1.0:
            first = True
            for i in range(n):
                if w[i] < w0 - tol_e:
                    ut[i] = gt[i] / (w0 - w[i])
                elif first:
                    ut[i] = math.sqrt(1.0 - s_other)
                    first = False
            return ut, True
    mu, ok = _secular_root(w, gt, w0, w0 + gnorm)
    nrm = 0.0
    for i in range(n):
        ut[i] = gt[i] / (mu - w[i])
        nrm += ut[i] * ut[i]
    nrm = math.sqrt(nrm)
    if nrm > 0.0:
        for i in range(n):
            ut[i] /= nrm
    return ut, ok


@njit
def _argmin_ball(w, gt, gnorm):
    n = w.shape[0]
    ut = np.zeros(n)
    scale = max(abs(w[0]), gnorm, 1e-300)
    tol0 = 1e-14 * scale
    interior = True
    s = 0.0
    for i in range(n):
        if w[i] > tol0:
            v = gt[i] / w[i]
            s += v * v
        elif abs(gt[i]) > 1e-13 * gnorm:
            interior = False
    if interior and s <= 1.0:
        for i in range(n):
            if w[i] > tol0:
                ut[i] = -gt[i] / w[i]
        return ut, True
    # boundary solution (H + nu I) u = -g, nu >= 0: poles sit at -w_i
    negw = np.empty(n)
    wmin = 0.0
    for i in range(n):
        negw[i] = -w[i]
        wmin = min(wmin, w[i])
    nu, ok = _secular_root(negw, gt, -wmin, gnorm - wmin)
    nrm = 0.0
    for i in range(n):
        ut[i] = -gt[i] / (w[i] + nu)
        nrm += ut[i] * ut[i]
    nrm = math.sqrt(nrm)
    if nrm > 0.0:
        for i in range(n):
            ut[i] /= nrm
    return ut, ok


@njit
def _residual_norm(A, V, ut, d):
    n = A.shape[0]
    m = V.shape[0]
    u = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for j in range(m):
            acc += V[i, j] * ut[j]
        u[i] = acc
    tot = 0.0
    for i in range(n):
        acc = d[i]
        for j in range(m):
            acc += A[i, j] * u[j]
        tot += acc * acc
    return math.sqrt(tot)


@njit
def norm_extrema(A, d):
    """min and max of |A u + d| over the closed unit ball.

    Returns (lo, hi, ok).
    """
    n = A.shape[0]
    m = A.shape[1]
    H = gram(A)
    g = np.zeros(m)
    for j in range(m):
        acc = 0.0
        for i in range(n):
            acc += A[i, j] * d[i]
        g[j] = acc
    w, V, ok = jacobi_eigh(H)
    gt = np.zeros(m)
    gn = 0.0
    for j in range(m):
        acc = 0.0
        for i in range(m):
            acc += V[i, j] * g[i]
        gt[j] = acc
        gn += acc * acc
    gn = math.sqrt(gn)
    ut_max, ok_max = _argmax_sphere(w, gt, gn)
    ut_min, ok_min = _argmin_ball(w, gt, gn)
    hi = _residual_norm(A, V, ut_max, d)
    lo = _residual_norm(A, V, ut_min, d)
    return lo, hi, ok and ok_max and ok_min


@njit
def norm_extrema_batch(A, d):
    k = A.shape[0]
    lo = np.empty(k)
    hi = np.empty(k)
    ok = np.empty(k, dtype=np.bool_)
    for i in range(k):
        lo[i], hi[i], ok[i] = norm_extrema(A[i], d[i])
    return lo, hi, ok


@njit
def power_sum_root(a, beta):
    """Positive root of sum a_i x^beta_i = 1 (Newton in log x from the right).

    Returns (x, ok).
    """
    d = a.shape[0]
    b = math.inf
    for i in range(d):
        b = min(b, a[i] ** (-1.0 / beta[i]))
    lower = math.inf
    for i in range(d):
        lower = min(lower, float(d) ** (-1.0 / beta[i]))
    lower *= b
    s_hi = math.log(b)
    s_lo = math.log(lower)
    s = s_hi
    ok = False
    for _it in range(SECULAR_MAX_ITER):
        g = -1.0
        dg = 0.0
        for i in range(d):
            term = a[i] * math.exp(beta[i] * s)
            g += term
            dg += beta[i] * term
        if g == 0.0:
            ok = True
            break
        if g > 0.0:
            s_hi = s
        else:
            s_lo = s
        step = s - g / dg
        if not (s_lo <= step <= s_hi):
            step = 0.5 * (s_lo + s_hi)
        if abs(step - s) <= 1e-15 * max(1.0, abs(s)):
            s = step
            ok = True
            break
        s = step
    return math.exp(s), ok


CASE_SAME = 0
CASE_BALL = 1
CASE_FLAT = 2
CASE_MIDDLE = 3


@njit
def theta0_rho_batch(X, Y):
    """Closed-form one-sided distance of the four-regime planar cover.

    Returns (value, case label, pi * max-form) per pair; the max-form column is
    only meaningful for the middle-regime case and equals the value elsewhere.
    """
    m = X.shape[0]
    val = np.empty(m)
    case = np.empty(m, dtype=np.int64)
    maxform = np.empty(m)
    coef = np.empty(2)
    expo = np.array([5.0, 1.0])
    for i in range(m):
        d1 = Y[i, 0] - X[i, 0]
        d2 = Y[i, 1] - X[i, 1]
        ax2 = abs(X[i, 1])
        dist2 = d1 * d1 + d2 * d2
        if dist2 == 0.0:
            val[i] = 0.0
            case[i] = CASE_SAME
            maxform[i] = 0.0
            continue
        dist = math.sqrt(dist2)
        if dist >= 1.0 or dist ** (2.0 / 3.0) < ax2:
            val[i] = math.pi * dist2
            case[i] = CASE_BALL
            maxform[i] = val[i]
            continue
        sq = d1 * d1
        phi = 2.0 ** -0.75 * (sq + math.sqrt(sq * sq + 4.0 * d2 * d2)) ** 0.75
        if ax2 <= phi:
            val[i] = math.pi * phi * phi
            case[i] = CASE_FLAT
            maxform[i] = val[i]
            continue
        ca = sq * ax2 * ax2
        cb = d2 * d2 / (ax2 * ax2)
        if ca == 0.0:
            z = 1.0 / cb
        elif cb == 0.0:
            z = ca ** -0.2
        else:
            coef[0] = ca
            coef[1] = cb
            z, _ok = power_sum_root(coef, expo)
        val[i] = math.pi * z ** -3.0
        case[i] = CASE_MIDDLE
        maxform[i] = math.pi * max(
            (abs(d1) * ax2) ** 1.2, d2 ** 6 / ax2 ** 6
        )
    return val, case, maxform
