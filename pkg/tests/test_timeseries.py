import math

import numpy as np
import pytest

from repsample.timeseries import (dtw_distance, dtw_matrix, dtw_path, fastdtw_distance,
                                  haar_compress, haar_forward, haar_inverse)

from conftest import SWN


def naive_dtw(a, b):
    n, m = len(a), len(b)
    d = np.full((n + 1, m + 1), np.inf)
    d[0, 0] = 0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d[i, j] = abs(a[i - 1] - b[j - 1]) + min(d[i - 1, j], d[i, j - 1], d[i - 1, j - 1])
    return d[n, m]


def haar_matrix(n):
    """Orthonormal Haar analysis matrix built row by row (coarse to fine)."""
    rows = [np.ones(n) / math.sqrt(n)]
    size = n
    while size > 1:
        half = size // 2
        for start in range(0, n, size):
            r = np.zeros(n)
            r[start:start + half] = 1
            r[start + half:start + size] = -1
            rows.append(r / math.sqrt(size))
        size = half
    return np.array(rows)


def test_dtw_swn_pairs():
    assert dtw_distance(SWN[0], SWN[1]) == 8
    assert dtw_distance(SWN[2], SWN[8]) == 4


def test_dtw_identity_and_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.normal(size=rng.integers(1, 30)), rng.normal(size=rng.integers(1, 30))
        assert dtw_distance(a, a) == 0
        assert dtw_distance(a, b) == pytest.approx(dtw_distance(b, a), abs=1e-12)
        assert dtw_distance(a, b) == pytest.approx(naive_dtw(a, b), abs=1e-9)


def test_dtw_path_is_monotone_and_sums_to_distance():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=17), rng.normal(size=11)
    dist, path = dtw_path(a, b)
    assert path[0] == (0, 0) and path[-1] == (16, 10)
    for (i0, j0), (i1, j1) in zip(path, path[1:]):
        assert (i1 - i0, j1 - j0) in ((1, 0), (0, 1), (1, 1))
    assert sum(abs(a[i] - b[j]) for i, j in path) == pytest.approx(dist)


def test_fastdtw_saturating_radius_is_exact():
    assert fastdtw_distance(SWN[0], SWN[1], radius=5) == 8
    rng = np.random.default_rng(2)
    for _ in range(5):
        a, b = rng.normal(size=64), rng.normal(size=64)
        assert fastdtw_distance(a, b, radius=64) == pytest.approx(naive_dtw(a, b), abs=1e-9)


def test_fastdtw_upper_bounds_exact():
    rng = np.random.default_rng(3)
    for r in (1, 2, 4):
        for _ in range(10):
            a, b = rng.normal(size=rng.integers(2, 80)), rng.normal(size=rng.integers(2, 80))
            approx = fastdtw_distance(a, b, radius=r)
            assert approx >= dtw_distance(a, b) - 1e-9
            assert fastdtw_distance(a, a, radius=r) == 0


def test_fastdtw_rejects_bad_radius():
    with pytest.raises(ValueError):
        fastdtw_distance([1, 2], [1, 2], radius=0)


def test_dtw_matrix_exact_and_fast():
    m = dtw_matrix(SWN)
    assert np.allclose(m, m.T) and np.all(np.diag(m) == 0)
    oracle = np.array([[naive_dtw(a, b) for b in SWN] for a in SWN])
    assert np.array_equal(m, oracle)
    assert np.array_equal(dtw_matrix(SWN, radius=10), oracle)


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
def test_haar_forward_matches_matrix_oracle(n):
    x = np.random.default_rng(n).normal(size=n)
    h = haar_matrix(n)
    assert np.allclose(h @ h.T, np.eye(n))
    assert np.allclose(haar_forward(x), h @ x)
    assert np.allclose(haar_inverse(haar_forward(x)), x)


def test_haar_compress_small_example():
    h = haar_matrix(4)
    c = h @ np.array([4.0, 5, 5, 5])
    keep = np.argsort(-np.abs(c), kind="stable")[:2]
    mask = np.zeros(4)
    mask[keep] = 1
    assert np.allclose(haar_compress([4, 5, 5, 5], 2), h.T @ (c * mask))
    assert np.allclose(haar_compress([4, 5, 5, 5], 2), [4.25, 5.25, 4.75, 4.75])


def test_haar_compress_full_and_constant():
    x = np.random.default_rng(5).normal(size=13)
    assert np.allclose(haar_compress(x, 16), x)
    assert np.allclose(haar_compress([3.0, 3, 3, 3], 1), [3, 3, 3, 3])


def test_haar_compress_keeps_mean_with_average_term():
    x = np.array([10.0, 11, 9, 10, 10, 12, 8, 10])
    y = haar_compress(x, 1)
    assert np.allclose(y, x.mean())
    assert y.mean() == pytest.approx(x.mean())


def test_haar_compress_bounds():
    with pytest.raises(ValueError):
        haar_compress([1, 2, 3], 0)
    with pytest.raises(ValueError):
        haar_compress([1, 2, 3], 5)
