"""Seeded random streams and chunked, worker-count independent execution.

Every stochastic routine splits its sample budget into fixed-size chunks.
Chunk ``i`` draws from the counter-based stream keyed by ``(seed, *stream, i)``,
so the concatenated result is the same for any number of workers and the
first ``N`` samples of a larger run coincide with an ``N``-sample run.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

CHUNK = 256


@dataclass(frozen=True)
class SeededRng:
    seed: int
    stream: tuple = ()

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream", tuple(int(k) for k in self.stream))

    def child(self, *keys) -> "SeededRng":
        return SeededRng(self.seed, self.stream + tuple(keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(seq))


def as_rng(rng) -> SeededRng:
    if isinstance(rng, SeededRng):
        return rng
    return SeededRng(int(rng))


def run_chunks(fn, rng, total, workers=1, chunk=CHUNK):
    """Evaluate ``fn(generator, chunk)`` on every chunk and concatenate.

    ``fn`` must return a tuple of arrays whose first axis has length ``chunk``.
    The concatenation is truncated to ``total`` rows.
    """
    rng = as_rng(rng)
    n_chunks = -(-int(total) // chunk)
    if n_chunks == 0:
        return None

    def job(i):
        return fn(rng.child(i).generator(), chunk)

    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_chunks)))
    else:
        parts = [job(i) for i in range(n_chunks)]
    return tuple(np.concatenate(cols)[:total] for cols in zip(*parts))


def unit_ball(gen, size, n):
    """Uniform samples from the closed unit ball in R^n."""
    g = gen.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radius = gen.random(size) ** (1.0 / n)
    return g * radius[:, None]


def unit_sphere(gen, size, n):
    g = gen.standard_normal((size, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def random_orthogonal(gen, n, size=None):
    """Haar-distributed orthogonal matrices (QR with sign correction)."""
    shape = (n, n) if size is None else (size, n, n)
    Z = gen.standard_normal(shape)
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return Q * signs[..., None, :]


def quasi_uniform_directions(count, n):
    """Deterministic, evenly spread unit vectors (golden-angle / Fibonacci lattice)."""
    j = np.arange(count) + 0.5
    if n == 1:
        return np.where(np.arange(count) % 2 == 0, 1.0, -1.0)[:, None]
    if n == 2:
        ang = 2.0 * np.pi * j / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if n == 3:
        golden = np.pi * (3.0 - np.sqrt(5.0))
        z = 1.0 - 2.0 * j / count
        rad = np.sqrt(1.0 - z * z)
        ang = golden * np.arange(count)
        return np.stack([rad * np.cos(ang), rad * np.sin(ang), z], axis=1)
    # n > 3: fixed-key Gaussian directions
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=count, spawn_key=(n,))))
    return unit_sphere(gen, count, n)


def map_tasks(fn, rng, n_tasks, workers=1):
    """``[fn(i, generator_i) for i in range(n_tasks)]`` with per-task streams."""
    rng = as_rng(rng)

    def job(i):
        return fn(i, rng.child(i).generator())

    if workers > 1 and n_tasks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, range(n_tasks)))
    return [job(i) for i in range(n_tasks)]
