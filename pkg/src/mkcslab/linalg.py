"""Exact integer vectors and small {0,1} / {-1,+1} matrices.

Vectors are read-only ``int64`` numpy arrays. Every product is guarded so
that int64 arithmetic can never wrap silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from . import _kernels

DEFAULT_GRID_BOUND = 8
MAX_ANNIHILATOR_N = 30

# |entries| above this are refused before any product is formed
INT_GUARD = 1 << 62

Kind = Literal["binary", "sign"]
_ALPHABET = {"binary": (0, 1), "sign": (-1, 1)}


class GridError(ValueError):
    """An entry lies outside the configured integer grid."""


class ExactArithmeticError(OverflowError):
    """An exact integer result would not fit the int64 guard."""


def int_vector(values: Iterable[int], bound: int | None = DEFAULT_GRID_BOUND) -> np.ndarray:
    """Validate ``values`` as a non-empty integer tuple and freeze it.

    ``bound`` is the grid bound B: any entry with ``|v| > B`` raises
    :class:`GridError`. Pass ``None`` for outputs ``y`` that are not grid
    points.
    """
    raw = list(values)
    for v in raw:
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            raise TypeError(f"vector entries must be integers, got {v!r}")
    if len(raw) < 1:
        raise ValueError("vector must have at least one entry")
    if any(abs(int(v)) >= INT_GUARD for v in raw):
        raise ExactArithmeticError("vector entry exceeds the int64 guard")
    if bound is not None:
        bad = [int(v) for v in raw if abs(int(v)) > bound]
        if bad:
            raise GridError(f"entries {bad} exceed grid bound {bound}")
    out = np.array([int(v) for v in raw], dtype=np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SmallMatrix:
    """A d x n matrix over {0,1} (``binary``) or {-1,+1} (``sign``), row-major."""

    entries: np.ndarray
    kind: Kind = "binary"

    def __post_init__(self):
        if self.kind not in _ALPHABET:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        a = np.array(self.entries, dtype=np.int64, copy=True)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"matrix must be 2-D and non-empty, got shape {a.shape}")
        if not np.isin(a, _ALPHABET[self.kind]).all():
            raise ValueError(f"{self.kind} matrix has entries outside {_ALPHABET[self.kind]}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __eq__(self, other):
        if not isinstance(other, SmallMatrix):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.kind, self.entries.shape, self.entries.tobytes()))

    def __repr__(self):
        return f"SmallMatrix({self.entries.tolist()}, kind={self.kind!r})"

    @classmethod
    def from_bits(cls, code: int, d: int, n: int) -> "SmallMatrix":
        """Binary matrix whose row-major entries are the bits of ``code``, MSB first."""
        shifts = np.arange(d * n - 1, -1, -1, dtype=np.int64)
        bits = (np.int64(code) >> shifts) & 1
        return cls(bits.reshape(d, n), "binary")


def check_product_guard(A: np.ndarray, x: np.ndarray) -> None:
    n = A.shape[-1]
    amax = int(np.abs(A).max(initial=0))
    xmax = int(np.abs(x).max(initial=0))
    if n * amax * xmax >= INT_GUARD:
        raise ExactArithmeticError(
            f"product of {n} terms of size {amax}*{xmax} exceeds the int64 guard"
        )


def matvec(A: SmallMatrix, x: np.ndarray) -> np.ndarray:
    """Exact ``y = A x``."""
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 1 or x.shape[0] != A.cols:
        raise ValueError(f"dimension mismatch: A is {A.rows}x{A.cols}, x has length {x.shape}")
    check_product_guard(A.entries, x)
    return _kernels.matvec_rows(x[None, :], A.entries)[0]


def in_nullspace(A: SmallMatrix, z: np.ndarray) -> bool:
    return not matvec(A, z).any()


def annihilator_count(x: np.ndarray) -> int:
    """Number of binary b with b.x == 0, by walking all 2^n choices of b."""
    x = np.asarray(x, dtype=np.int64)
    n = x.shape[0]
    if not x.any():
        raise ValueError("annihilator count needs a nonzero vector")
    if n > MAX_ANNIHILATOR_N:
        raise ValueError(f"n={n} too large for exhaustion (limit {MAX_ANNIHILATOR_N})")
    check_product_guard(np.ones((1, n), dtype=np.int64), x)
    return _kernels.annihilator_count(x)


def annihilating_matrix_count(x: np.ndarray, d: int) -> int:
    """Number of binary d x n matrices with x in their null space."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return annihilator_count(x) ** d


# --- text formats ----------------------------------------------------------

def _parse_ints(tokens: list[str], where: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise ValueError(f"{where}: non-integer token ({exc})") from None


def parse_vector(text: str, bound: int | None = DEFAULT_GRID_BOUND) -> np.ndarray:
    """One line of whitespace-separated integers; anything after it is rejected."""
    lines = [ln for ln in text.strip().splitlines()]
    if len(lines) != 1:
        raise ValueError(f"vector text must be a single line, got {len(lines)}")
    return int_vector(_parse_ints(lines[0].split(), "vector"), bound=bound)


def format_vector(x: Iterable[int]) -> str:
    return " ".join(str(int(v)) for v in x)


def parse_matrix(text: str) -> SmallMatrix:
    lines = text.strip().splitlines()
    if not lines:
        raise ValueError("empty matrix text")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError("matrix header must be 'd n kind'")
    d, n = _parse_ints(header[:2], "matrix header")
    kind = header[2]
    if kind not in _ALPHABET:
        raise ValueError(f"matrix kind must be binary or sign, got {kind!r}")
    body = lines[1:]
    if len(body) != d:
        raise ValueError(f"expected {d} matrix rows, got {len(body)}")
    rows = []
    for k, line in enumerate(body):
        row = _parse_ints(line.split(), f"matrix row {k}")
        if len(row) != n:
            raise ValueError(f"matrix row {k} has {len(row)} entries, expected {n}")
        rows.append(row)
    return SmallMatrix(np.array(rows, dtype=np.int64), kind)


def format_matrix(A: SmallMatrix) -> str:
    lines = [f"{A.rows} {A.cols} {A.kind}"]
    lines += [format_vector(row) for row in A.entries]
    return "\n".join(lines) + "\n"
