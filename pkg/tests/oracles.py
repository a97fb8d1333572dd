"""Brute-force reference implementations used only by the tests.

Nothing here shares code with the enumerator or the codebook: valid programs
are found by trying to decode every bit string, and products are scalar loops.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from mkcslab import language


@lru_cache(maxsize=None)
def valid_encodings(n: int, lmax: int) -> tuple[str, ...]:
    """Every bit string of length <= lmax that is exactly one program, by
    (length, bit string)."""
    out = []
    for L in range(1, lmax + 1):
        for k in range(1 << L):
            bits = format(k, f"0{L}b")
            try:
                _, used = language.decode(bits, n)
            except language.DecodeError:
                continue
            if used == L:
                out.append(bits)
    return tuple(out)


@lru_cache(maxsize=None)
def first_programs(n: int, lmax: int) -> dict[tuple, tuple[int, str]]:
    """vector -> (length, bits) of the first program producing it."""
    table: dict[tuple, tuple[int, str]] = {}
    for bits in valid_encodings(n, lmax):
        prog, _ = language.decode(bits, n)
        vec = tuple(int(v) for v in language.evaluate(prog, n))
        table.setdefault(vec, (len(bits), bits))
    return table


def oracle_kd(x, lmax: int) -> int | None:
    x = tuple(int(v) for v in x)
    hit = first_programs(len(x), lmax).get(x)
    return None if hit is None else hit[0]


def scalar_matvec(A, x) -> list[int]:
    A = [[int(v) for v in row] for row in np.asarray(A)]
    x = [int(v) for v in x]
    out = []
    for row in A:
        acc = 0
        for a, b in zip(row, x):
            acc += a * b
        out.append(acc)
    return out


def annihilators(x) -> int:
    x = [int(v) for v in x]
    return sum(
        1 for b in itertools.product((0, 1), repeat=len(x))
        if sum(bi * xi for bi, xi in zip(b, x)) == 0
    )


def grid(n: int, B: int):
    return itertools.product(range(-B, B + 1), repeat=n)
