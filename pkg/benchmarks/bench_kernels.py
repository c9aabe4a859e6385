"""Time the compiled kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--size N] [--repeat R]

The fallback is what ELLCOVER_DISABLE_NUMBA=1 selects; it is timed in a child
process with that flag set, since the flag is read at import.  Outputs of the
two paths are compared as well.
"""
import argparse
import json
import os
import subprocess
import sys
import tempfile
import timeit

import numpy as np


def _cases(size, seed):
    from ellcover import _kernels

    gen = np.random.default_rng(seed)
    A = gen.standard_normal((size, 3, 3))
    S = A @ A.transpose(0, 2, 1)
    d = gen.standard_normal((size, 3))
    X = gen.uniform(-1, 1, (size, 2)) * 2.0 ** gen.uniform(-12, 0, (size, 2))
    Y = X + gen.standard_normal((size, 2)) * 2.0 ** gen.uniform(-12, 0, (size, 1))
    a = gen.uniform(0.1, 2.0, 4)
    beta = gen.uniform(0.5, 5.0, 4)
    return {
        "jacobi_eigh_batch": (_kernels.jacobi_eigh_batch, (S,)),
        "spectral_norm_batch": (_kernels.spectral_norm_batch, (A,)),
        "norm_extrema_batch": (_kernels.norm_extrema_batch, (A, d)),
        "theta0_rho_batch": (_kernels.theta0_rho_batch, (X, Y)),
        "power_sum_root": (_kernels.power_sum_root, (a, beta)),
    }


def _flatten(out):
    if isinstance(out, tuple):
        return [np.asarray(o, float).ravel().tolist() for o in out]
    return [np.asarray(out, float).ravel().tolist()]


def run_all(size, repeat, seed):
    """Timings in ms and flattened outputs for the current mode."""
    result = {}
    for name, (kernel, inputs) in _cases(size, seed).items():
        out = kernel(*inputs)  # warm-up / compile
        t = min(timeit.repeat(lambda: kernel(*inputs), number=1, repeat=repeat)) * 1e3
        result[name] = {"ms": t, "out": _flatten(out)}
    return result


def _agree(a, b):
    return all(np.allclose(x, y, rtol=1e-10, atol=1e-13, equal_nan=True) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--child", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.child:
        with open(args.child, "w") as fh:
            json.dump(run_all(args.size, args.repeat, args.seed), fh)
        return

    from ellcover._accel import NUMBA_ENABLED

    if not NUMBA_ENABLED:
        print("numba is disabled in this process; the jit column times the fallback too")
    jit = run_all(args.size, args.repeat, args.seed)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "fallback.json")
        env = dict(os.environ, ELLCOVER_DISABLE_NUMBA="1")
        cmd = [sys.executable, __file__, "--size", str(args.size), "--repeat", str(args.repeat),
               "--seed", str(args.seed), "--child", path]
        subprocess.run(cmd, env=env, check=True)
        with open(path) as fh:
            fallback = json.load(fh)

    print(f"size={args.size}")
    print(f"{'kernel':22s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}  agree")
    for name, res in jit.items():
        fb = fallback[name]
        print(f"{name:22s} {res['ms']:11.3f} {fb['ms']:11.3f} {fb['ms'] / res['ms']:8.1f}  "
              f"{_agree(res['out'], fb['out'])}")


if __name__ == "__main__":
    main()
