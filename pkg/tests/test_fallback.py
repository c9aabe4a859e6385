"""The pure-numpy path (ELLCOVER_DISABLE_NUMBA=1) agrees with the compiled kernels."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ellcover import _kernels
from ellcover._accel import NUMBA_ENABLED

SCRIPT = r"""
import json, sys
import numpy as np
from ellcover import _kernels
from ellcover._accel import NUMBA_ENABLED
def flat(out):
    parts = out if isinstance(out, tuple) else (out,)
    return [np.asarray(p, float).ravel().tolist() for p in parts]
gen = np.random.default_rng(99)
A = gen.standard_normal((40, 3, 3)); S = A @ A.transpose(0, 2, 1); d = gen.standard_normal((40, 3))
X = gen.uniform(-1, 1, (200, 2)) * 2.0 ** gen.uniform(-12, 0, (200, 2))
Y = X + gen.standard_normal((200, 2)) * 2.0 ** gen.uniform(-12, 0, (200, 1))
out = {
    "numba": NUMBA_ENABLED,
    "eig": flat(_kernels.jacobi_eigh_batch(S)[0]),
    "norm": flat(_kernels.spectral_norm_batch(A)),
    "extrema": flat(_kernels.norm_extrema_batch(A, d)),
    "theta0": flat(_kernels.theta0_rho_batch(X, Y)),
    "power": flat(_kernels.power_sum_root(np.array([0.3, 0.5, 1.2]), np.array([1.0, 2.5, 4.0]))),
}
json.dump(out, sys.stdout)
"""


def _run(disable):
    env = dict(os.environ)
    env.pop("ELLCOVER_DISABLE_NUMBA", None)
    if disable:
        env["ELLCOVER_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def test_fallback_matches_jit():
    fast, slow = _run(False), _run(True)
    assert slow["numba"] is False
    assert fast["numba"] is NUMBA_ENABLED
    for key in ("eig", "norm", "extrema", "theta0", "power"):
        for f, s in zip(fast[key], slow[key]):
            assert np.allclose(f, s, rtol=1e-10, atol=1e-13), key


def test_kernels_callable_in_process():
    x, ok = _kernels.power_sum_root(np.array([1.0, 1.0]), np.array([1.0, 2.0]))
    assert ok and x == pytest.approx((5 ** 0.5 - 1) / 2, abs=1e-15)
