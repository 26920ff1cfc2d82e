import itertools
import math

import numpy as np
import pytest

from varsample.exceptions import SimplexCapExceeded
from varsample.tda import estimate_simplex_count, rips_filtration


def brute_force_rips(points, t_max, p_max):
    found = {}
    for size in range(1, p_max + 3):
        for simplex in itertools.combinations(range(len(points)), size):
            diameter = max((float(np.linalg.norm(points[a] - points[b]))
                            for a, b in itertools.combinations(simplex, 2)), default=0.0)
            if diameter <= t_max:
                found[simplex] = diameter
    return found


def test_matches_brute_force_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(10):
        points = rng.uniform(0, 1, (7, 3))
        fc = rips_filtration(points, 0.8, p_max=2)
        expected = brute_force_rips(points, 0.8, 2)
        assert set(fc.simplices) == set(expected)
        for s, v in zip(fc.simplices, fc.values):
            assert v == pytest.approx(expected[s])


def test_faces_come_before_cofaces():
    points = np.random.default_rng(1).uniform(0, 1, (8, 2))
    fc = rips_filtration(points, 1.0, p_max=2)
    for i in range(len(fc)):
        assert all(j < i for j in fc.boundary(i))
    assert fc.values == sorted(fc.values)


def test_square_corners():
    fc = rips_filtration([[0, 0], [1, 0], [1, 1], [0, 1]], 1.5, p_max=1)
    assert fc.count(0) == 4
    assert fc.count(1) == 6
    assert fc.count(2) == 4
    assert fc.values[fc.position((0, 2))] == pytest.approx(math.sqrt(2))


def test_threshold_excludes_long_edges():
    fc = rips_filtration([[0, 0], [1, 0], [3, 0]], 1.5, p_max=1)
    assert (1, 2) not in fc.simplices
    assert (0, 1) in fc.simplices


def test_estimate_bounds_actual_count():
    points = np.random.default_rng(2).uniform(0, 1, (30, 3))
    fc = rips_filtration(points, 0.5, p_max=2)
    assert estimate_simplex_count(points, 0.5, 2) >= len(fc)


def test_simplex_cap():
    points = np.random.default_rng(3).uniform(0, 1, (30, 2))
    with pytest.raises(SimplexCapExceeded) as exc:
        rips_filtration(points, 2.0, p_max=2, simplex_cap=100)
    assert exc.value.cap == 100
    assert exc.value.estimate > 100


def test_empty_and_single_point():
    assert len(rips_filtration(np.empty((0, 2)), 1.0)) == 0
    assert rips_filtration([[0.5, 0.5]], 1.0).simplices == [(0,)]


def test_filtration_values_never_exceed_threshold():
    rng = np.random.default_rng(31)
    for _ in range(100):
        points = rng.uniform(-1, 1, (12, 4))
        i, j = rng.choice(12, size=2, replace=False)
        t_max = float(np.linalg.norm(points[i] - points[j]))
        for t in (t_max, np.nextafter(t_max, 0.0)):
            fc = rips_filtration(points, t, p_max=1)
            assert max(fc.values) <= t
