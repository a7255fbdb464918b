"""Hot numeric loops, in two interchangeable flavours.

Each kernel exists as a numba ``@njit`` function and as a pure numpy/Python
function with identical semantics. The module-level public names point at
the numba flavour unless numba is unavailable or ``DPCDF_DISABLE_NUMBA`` is
set to a truthy value in the environment before import.

Both flavours are always importable by their suffixed names
(``pav_numba``/``pav_numpy`` ...) so tests and ``benchmarks/`` can compare them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

_FLAG = os.environ.get("DPCDF_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = njit is not None and _FLAG not in {"1", "true", "yes", "on"}


# -- numpy flavour ---------------------------------------------------------


def power_moments_numpy(x, m):
    """Return ``[mean(x**1), ..., mean(x**m)]``."""
    x = np.asarray(x, dtype=np.float64)
    if m == 0:
        return np.zeros(0)
    powers = np.cumprod(np.broadcast_to(x, (m, x.size)), axis=0)
    return powers.mean(axis=1)


def pav_numpy(y):
    """Pool-adjacent-violators: l2 projection onto nondecreasing sequences."""
    y = np.asarray(y, dtype=np.float64)
    sums: list[float] = []
    counts: list[int] = []
    for v in y:
        s, c = float(v), 1
        # merge while the previous block mean exceeds the new one
        while sums and sums[-1] * c > s * counts[-1]:
            s += sums.pop()
            c += counts.pop()
        sums.append(s)
        counts.append(c)
    means = np.array(sums) / np.array(counts)
    return np.repeat(means, counts)


def legendre_table_numpy(kmax, x):
    """Rows ``P_0(x) .. P_kmax(x)`` by the three-term recurrence."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((kmax + 1, x.size))
    out[0] = 1.0
    if kmax >= 1:
        out[1] = x
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1)
    return out


# -- numba flavour ---------------------------------------------------------

if njit is not None:

    @njit(cache=True)
    def _power_moments_numba(x, m):
        n = x.size
        acc = np.zeros(m)
        for j in range(n):
            p = 1.0
            xj = x[j]
            for i in range(m):
                p *= xj
                acc[i] += p
        return acc / n

    @njit(cache=True)
    def _pav_numba(y):
        n = y.size
        sums = np.empty(n)
        counts = np.empty(n, dtype=np.int64)
        top = 0
        for j in range(n):
            s = y[j]
            c = 1
            while top > 0 and sums[top - 1] * c > s * counts[top - 1]:
                top -= 1
                s += sums[top]
                c += counts[top]
            sums[top] = s
            counts[top] = c
            top += 1
        out = np.empty(n)
        pos = 0
        for b in range(top):
            mean = sums[b] / counts[b]
            for _ in range(counts[b]):
                out[pos] = mean
                pos += 1
        return out

    def pav_numba(y):
        return _pav_numba(np.ascontiguousarray(y, dtype=np.float64))

    @njit(cache=True)
    def _legendre_table_numba(kmax, x):
        n = x.size
        out = np.empty((kmax + 1, n))
        for j in range(n):
            out[0, j] = 1.0
            if kmax >= 1:
                out[1, j] = x[j]
            for k in range(1, kmax):
                out[k + 1, j] = ((2 * k + 1) * x[j] * out[k, j] - k * out[k - 1, j]) / (k + 1)
        return out

    def legendre_table_numba(kmax, x):
        return _legendre_table_numba(int(kmax), np.ascontiguousarray(x, dtype=np.float64))

    def power_moments_numba(x, m):
        return _power_moments_numba(np.ascontiguousarray(x, dtype=np.float64), int(m))

else:  # pragma: no cover
    power_moments_numba = pav_numba = legendre_table_numba = None


if USE_NUMBA:
    power_moments = power_moments_numba
    pav = pav_numba
    legendre_table = legendre_table_numba
else:
    power_moments = power_moments_numpy
    pav = pav_numpy
    legendre_table = legendre_table_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
