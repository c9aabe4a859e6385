import numpy as np
import pytest

from ellcover.streams import (
    SeededRng,
    map_tasks,
    quasi_uniform_directions,
    random_orthogonal,
    run_chunks,
    unit_ball,
)


def _draw(gen, size):
    return (gen.standard_normal((size, 2)),)


def test_worker_independence():
    a = run_chunks(_draw, SeededRng(7), 1000, workers=1)[0]
    b = run_chunks(_draw, SeededRng(7), 1000, workers=8)[0]
    assert np.array_equal(a, b)


def test_prefix_property():
    small = run_chunks(_draw, SeededRng(7), 300)[0]
    large = run_chunks(_draw, SeededRng(7), 3000)[0]
    assert np.array_equal(small, large[:300])


def test_children_differ():
    r = SeededRng(1)
    assert not np.array_equal(r.child(0).generator().random(4), r.child(1).generator().random(4))
    assert np.array_equal(r.child(0).generator().random(4), SeededRng(1, (0,)).generator().random(4))


def test_map_tasks_workers():
    fn = lambda i, g: (i, g.random())
    assert map_tasks(fn, SeededRng(2), 20, 1) == map_tasks(fn, SeededRng(2), 20, 4)


def test_bad_seed():
    with pytest.raises(ValueError):
        SeededRng(-1)


def test_samplers(gen):
    pts = unit_ball(gen, 5000, 3)
    assert (np.linalg.norm(pts, axis=1) <= 1).all()
    Q = random_orthogonal(gen, 3, size=10)
    assert np.allclose(Q @ Q.transpose(0, 2, 1), np.eye(3), atol=1e-12)
    for n in (1, 2, 3, 5):
        U = quasi_uniform_directions(50, n)
        assert U.shape == (50, n) and np.allclose(np.linalg.norm(U, axis=1), 1)
