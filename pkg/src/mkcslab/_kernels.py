"""Inner loops shared by the solver and census code.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with the same signature. The numba path is used when numba imports
and ``MKCSLAB_DISABLE_NUMBA`` is unset (or ``0``). Both paths return
identical results; ``tests/test_kernels.py`` checks that.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "USE_NUMBA",
    "annihilator_count",
    "matvec_rows",
    "null_mask",
    "first_match",
    "numpy_kernels",
    "numba_kernels",
]


def _numba_requested() -> bool:
    flag = os.environ.get("MKCSLAB_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _numba_requested()

_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def _annihilator_count_np(x: np.ndarray) -> int:
    n = x.shape[0]
    total = 1 << n
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    count = 0
    for start in range(0, total, _CHUNK):
        b = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        bits = (b[:, None] >> shifts) & 1
        count += int(np.count_nonzero(bits @ x == 0))
    return count


def _matvec_rows_np(V: np.ndarray, A: np.ndarray) -> np.ndarray:
    return V @ A.T


def _null_mask_np(V: np.ndarray, A: np.ndarray) -> np.ndarray:
    return ~(V @ A.T).any(axis=1)


def _first_match_np(V: np.ndarray, A: np.ndarray, y: np.ndarray) -> tuple[int, int]:
    hits = np.flatnonzero((V @ A.T == y).all(axis=1))
    if hits.size == 0:
        return -1, 0
    return int(hits[0]), int(hits.size)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _annihilator_count_nb(x):
        # Gray-code walk: one coordinate flips per step, so b.x updates in O(1).
        n = x.shape[0]
        total = np.int64(1) << n
        s = np.int64(0)
        count = np.int64(1)  # b = 0
        b = np.int64(0)
        for k in range(1, total):
            j = 0
            while ((k >> j) & 1) == 0:
                j += 1
            mask = np.int64(1) << j
            # bit j counts from the right; coordinate n-1-j in MSB-first order
            if b & mask:
                s -= x[n - 1 - j]
            else:
                s += x[n - 1 - j]
            b ^= mask
            if s == 0:
                count += 1
        return count

    @numba.njit(cache=True, nogil=True)
    def _matvec_rows_nb(V, A):
        m, n = V.shape
        d = A.shape[0]
        out = np.zeros((m, d), dtype=np.int64)
        for r in range(m):
            for i in range(d):
                acc = np.int64(0)
                for j in range(n):
                    acc += A[i, j] * V[r, j]
                out[r, i] = acc
        return out

    @numba.njit(cache=True, nogil=True)
    def _null_mask_nb(V, A):
        m, n = V.shape
        d = A.shape[0]
        out = np.ones(m, dtype=np.bool_)
        for r in range(m):
            for i in range(d):
                acc = np.int64(0)
                for j in range(n):
                    acc += A[i, j] * V[r, j]
                if acc != 0:
                    out[r] = False
                    break
        return out

    @numba.njit(cache=True, nogil=True)
    def _first_match_nb(V, A, y):
        m, n = V.shape
        d = A.shape[0]
        first = -1
        hits = 0
        for r in range(m):
            ok = True
            for i in range(d):
                acc = np.int64(0)
                for j in range(n):
                    acc += A[i, j] * V[r, j]
                if acc != y[i]:
                    ok = False
                    break
            if ok:
                if first < 0:
                    first = r
                hits += 1
        return first, hits


class _Kernels:
    def __init__(self, annihilator, matvec, null, first):
        self._annihilator = annihilator
        self._matvec = matvec
        self._null = null
        self._first = first

    def annihilator_count(self, x: np.ndarray) -> int:
        return int(self._annihilator(np.ascontiguousarray(x, dtype=np.int64)))

    def matvec_rows(self, V: np.ndarray, A: np.ndarray) -> np.ndarray:
        return self._matvec(_c64(V), _c64(A))

    def null_mask(self, V: np.ndarray, A: np.ndarray) -> np.ndarray:
        return self._null(_c64(V), _c64(A))

    def first_match(self, V: np.ndarray, A: np.ndarray, y: np.ndarray) -> tuple[int, int]:
        """Index of the first row v of V with A v == y, and how many rows match."""
        first, hits = self._first(_c64(V), _c64(A), _c64(y))
        return int(first), int(hits)


def _c64(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


numpy_kernels = _Kernels(_annihilator_count_np, _matvec_rows_np, _null_mask_np, _first_match_np)
numba_kernels = (
    _Kernels(_annihilator_count_nb, _matvec_rows_nb, _null_mask_nb, _first_match_nb)
    if numba is not None
    else None
)

_active = numba_kernels if USE_NUMBA else numpy_kernels

annihilator_count = _active.annihilator_count
matvec_rows = _active.matvec_rows
null_mask = _active.null_mask
first_match = _active.first_match
