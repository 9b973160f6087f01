"""Time-series distances and compression: exact DTW, FastDTW, Haar wavelets."""
from __future__ import annotations

import math

import numba as nb
import numpy as np

_INF = np.inf


@nb.njit(cache=True)
def _dtw_window(a, b, lo, hi):
    """Cumulative |a_i - b_j| cost restricted to columns lo[i]..hi[i] of each row."""
    n, m = a.shape[0], b.shape[0]
    d = np.full((n, m), _INF)
    for i in range(n):
        for j in range(lo[i], hi[i] + 1):
            c = abs(a[i] - b[j])
            if i == 0 and j == 0:
                d[i, j] = c
                continue
            best = _INF
            if i > 0 and d[i - 1, j] < best:
                best = d[i - 1, j]
            if j > 0 and d[i, j - 1] < best:
                best = d[i, j - 1]
            if i > 0 and j > 0 and d[i - 1, j - 1] < best:
                best = d[i - 1, j - 1]
            d[i, j] = c + best
    return d


@nb.njit(cache=True)
def _traceback(d):
    i, j = d.shape[0] - 1, d.shape[1] - 1
    path = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = d[i - 1, j - 1], d[i - 1, j], d[i, j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return path


@nb.njit(cache=True)
def _dtw_full_value(a, b):
    n, m = a.shape[0], b.shape[0]
    prev = np.full(m, _INF)
    cur = np.empty(m)
    for i in range(n):
        for j in range(m):
            c = abs(a[i] - b[j])
            if i == 0 and j == 0:
                cur[j] = c
                continue
            best = _INF
            if i > 0 and prev[j] < best:
                best = prev[j]
            if j > 0 and cur[j - 1] < best:
                best = cur[j - 1]
            if i > 0 and j > 0 and prev[j - 1] < best:
                best = prev[j - 1]
            cur[j] = c + best
        prev, cur = cur, prev
    return prev[m - 1]


@nb.njit(cache=True)
def _dtw_pairwise(x):
    n = x.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v = _dtw_full_value(x[i], x[j])
            out[i, j] = v
            out[j, i] = v
    return out


def _as_series(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("series must be non-empty")
    return a


def dtw_distance(a, b) -> float:
    """Exact DTW with per-step cost ``|a_i - b_j|``."""
    return float(_dtw_full_value(_as_series(a), _as_series(b)))


def dtw_path(a, b) -> tuple[float, list[tuple[int, int]]]:
    a, b = _as_series(a), _as_series(b)
    lo = np.zeros(a.size, dtype=np.int64)
    hi = np.full(a.size, b.size - 1, dtype=np.int64)
    d = _dtw_window(a, b, lo, hi)
    return float(d[-1, -1]), list(_traceback(d))


def _coarsen(a: np.ndarray) -> np.ndarray:
    m = a.size // 2
    out = (a[: 2 * m : 2] + a[1 : 2 * m : 2]) / 2
    if a.size % 2:
        out = np.append(out, a[-1])
    return out


def _expand_window(path, n, m, radius):
    """Project a coarse warp path onto the fine grid, widened by ``radius``."""
    lo = np.full(n, m, dtype=np.int64)
    hi = np.full(n, -1, dtype=np.int64)
    cn, cm = (n + 1) // 2, (m + 1) // 2
    for i, j in path:
        for ci in range(max(0, i - radius), min(cn, i + radius + 1)):
            j0 = max(0, j - radius)
            j1 = min(cm - 1, j + radius)
            for fi in (2 * ci, 2 * ci + 1):
                if fi < n:
                    lo[fi] = min(lo[fi], 2 * j0)
                    hi[fi] = max(hi[fi], min(m - 1, 2 * j1 + 1))
    # a row hull of projected path blocks is connected; empty rows cannot occur
    # because the coarse path visits every coarse row
    return lo, hi


def _fastdtw(a, b, radius):
    min_size = radius + 2
    if a.size < min_size or b.size < min_size:
        return dtw_path(a, b)
    _, coarse_path = _fastdtw(_coarsen(a), _coarsen(b), radius)
    lo, hi = _expand_window(coarse_path, a.size, b.size, radius)
    d = _dtw_window(a, b, lo, hi)
    if not np.isfinite(d[-1, -1]):
        return dtw_path(a, b)
    return float(d[-1, -1]), list(_traceback(d))


def fastdtw_distance(a, b, radius: int = 1) -> float:
    """FastDTW approximation (multi-resolution, linear in series length).

    Falls back to exact DTW once either series is shorter than ``radius + 2``,
    so a radius at least as large as the longer series gives the exact value.
    """
    if radius < 1:
        raise ValueError("radius must be a positive integer")
    return _fastdtw(_as_series(a), _as_series(b), int(radius))[0]


def dtw_matrix(values: np.ndarray, radius: int | None = None) -> np.ndarray:
    """Symmetric pairwise DTW matrix; exact when ``radius`` is None."""
    x = np.ascontiguousarray(values, dtype=float)
    if radius is None or radius + 2 > x.shape[1]:
        return _dtw_pairwise(x)
    n = x.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = fastdtw_distance(x[i], x[j], radius)
    return out


def _next_pow2(n: int) -> int:
    return 1 << max(0, math.ceil(math.log2(n))) if n > 1 else 1


def haar_forward(a) -> np.ndarray:
    """Orthonormal Haar DWT of a power-of-two length signal.

    Layout: ``[approx, detail_coarsest, ..., detail_finest]``.
    """
    x = np.asarray(a, dtype=float).copy()
    n = x.size
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    out = np.empty(n)
    end = n
    while end > 1:
        half = end // 2
        even, odd = x[0:end:2].copy(), x[1:end:2].copy()
        x[:half] = (even + odd) / math.sqrt(2)
        out[half:end] = (even - odd) / math.sqrt(2)
        end = half
    out[0] = x[0]
    return out


def haar_inverse(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    n = c.size
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    x = c[:1].copy()
    size = 1
    while size < n:
        d = c[size : 2 * size]
        nxt = np.empty(2 * size)
        nxt[0::2] = (x + d) / math.sqrt(2)
        nxt[1::2] = (x - d) / math.sqrt(2)
        x = nxt
        size *= 2
    return x


def haar_compress(a, keep: int) -> np.ndarray:
    """Reconstruct ``a`` from its ``keep`` largest-magnitude Haar coefficients.

    The series is zero-padded to a power of two and the padding is stripped
    from the result. Magnitude ties go to the lower coefficient index.
    """
    a = _as_series(a)
    padded = _next_pow2(a.size)
    if not 1 <= keep <= padded:
        raise ValueError(f"keep must lie in [1, {padded}]")
    x = np.zeros(padded)
    x[: a.size] = a
    c = haar_forward(x)
    order = np.lexsort((np.arange(padded), -np.abs(c)))
    mask = np.zeros(padded, dtype=bool)
    mask[order[:keep]] = True
    return haar_inverse(np.where(mask, c, 0.0))[: a.size]
