"""Minimum-complexity recovery: the simplest solution of ``A z = y``.

Candidates are walked in enumeration order (shortest program first, ties by
bit string), so the first solution found is the estimator's answer. Ties at
the minimal length are reported as ``ambiguous`` rather than broken silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from . import _kernels
from .language import ComplexityResult, Program, codebook, to_sexpr
from .linalg import SmallMatrix, check_product_guard


@dataclass
class RecoveryResult:
    status: Literal["found", "budget-exhausted"]
    budget: int
    xhat: np.ndarray | None = None
    kd_bits: int | None = None
    ambiguous: bool = False
    witness: Program | None = field(default=None, repr=False)

    @property
    def found(self) -> bool:
        return self.status == "found"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "xhat": None if self.xhat is None else [int(v) for v in self.xhat],
            "kd_bits": self.kd_bits,
            "ambiguous": self.ambiguous,
        }


@dataclass
class ThresholdResult:
    budget: int
    kstar_bits: int | None  # None: no failure within budget, i.e. K* >= budget
    last_recovered_level: int | None = None
    first_failure: dict | None = None
    inputs_checked: int = 0
    failures: int = 0

    @property
    def kstar_label(self) -> int | str:
        return self.kstar_bits if self.kstar_bits is not None else f">= {self.budget}"

    def to_dict(self) -> dict:
        return {
            "kstar_bits": self.kstar_label,
            "first_failure": self.first_failure,
            "last_recovered_level": self.last_recovered_level,
            "inputs_checked": self.inputs_checked,
            "failures": self.failures,
            "budget": self.budget,
        }


def _check_dims(A: SmallMatrix, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or y.shape[0] != A.rows:
        raise ValueError(f"dimension mismatch: A has {A.rows} rows, y has shape {y.shape}")
    return y


def mkcs(A: SmallMatrix, y, lmax: int, bound: int | None = None) -> RecoveryResult:
    """Simplest z (within ``lmax`` bits) with ``A z == y``.

    ``bound`` restricts candidates to the integer grid ``|z_j| <= bound``.
    """
    y = _check_dims(A, y)
    book = codebook(A.cols, lmax).restrict(bound)
    for level, sl in book.level_slices():
        V = book.vectors[sl]
        check_product_guard(A.entries, V)
        first, hits = _kernels.first_match(V, A.entries, y)
        if first >= 0:
            k = sl.start + first
            return RecoveryResult("found", lmax, book.vectors[k], level, hits > 1, book.witness(k))
    return RecoveryResult("budget-exhausted", lmax)


def simplest_null_vector(A: SmallMatrix, lmax: int) -> ComplexityResult:
    """Cheapest nonzero z with ``A z == 0``, searched over every program
    within ``lmax`` bits (no grid restriction)."""
    book = codebook(A.cols, lmax)
    nonzero = np.flatnonzero(book.vectors.any(axis=1))
    if nonzero.size == 0:
        return ComplexityResult("budget-exhausted", lmax)
    start = int(nonzero[0])  # only the leading ZERO program gives the zero vector
    V = book.vectors[start:]
    check_product_guard(A.entries, V)
    hits = np.flatnonzero(_kernels.null_mask(V, A.entries))
    if hits.size == 0:
        return ComplexityResult("budget-exhausted", lmax)
    return book.result(start + int(hits[0]))


class Outcomes(NamedTuple):
    winner: np.ndarray     # index of the solver's answer for each input's output
    ambiguous: np.ndarray  # the solver's answer had an equally short rival

    @property
    def recovered(self) -> np.ndarray:
        return (self.winner == np.arange(self.winner.shape[0])) & ~self.ambiguous


def recovery_outcomes(Y: np.ndarray, levels: np.ndarray) -> Outcomes:
    """Solver outcome for every row of ``Y = V A^T`` at once.

    Rows must be in enumeration order. Inputs sharing an output form a class;
    the first member is what the solver returns for all of them.
    """
    m = Y.shape[0]
    if m == 0:
        empty = np.zeros(0, dtype=np.int64)
        return Outcomes(empty, empty.astype(bool))
    _, first, inverse = np.unique(Y, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    winner = first[inverse]
    same_level = levels == levels[winner]
    per_class = np.bincount(inverse[same_level], minlength=first.shape[0])
    return Outcomes(winner, per_class[inverse] > 1)


def recovery_check(A: SmallMatrix, level: int, lmax: int | None = None,
                   bound: int | None = None) -> tuple[bool, dict | None]:
    """Does the solver recover every input with ``K_D <= level`` exactly and
    without ties? Returns (ok, first failure or None)."""
    lmax = level if lmax is None else lmax
    book = codebook(A.cols, lmax).restrict(bound)
    V, levels = book.vectors_upto(level)
    check_product_guard(A.entries, V)
    out = recovery_outcomes(_kernels.matvec_rows(V, A.entries), levels)
    bad = np.flatnonzero(~out.recovered)
    if bad.size == 0:
        return True, None
    return False, _failure_record(book, out, int(bad[0]))


def _failure_record(book, out: Outcomes, k: int) -> dict:
    w = int(out.winner[k])
    return {
        "x": [int(v) for v in book.vectors[k]],
        "x_kd_bits": int(book.levels[k]),
        "x_witness": to_sexpr(book.witness(k)),
        "xhat": [int(v) for v in book.vectors[w]],
        "xhat_kd_bits": int(book.levels[w]),
        "xhat_witness": to_sexpr(book.witness(w)),
        "ambiguous": bool(out.ambiguous[k]),
    }


def kstar(A: SmallMatrix, lmax: int, bound: int | None = None) -> ThresholdResult:
    """Largest level K such that every input with ``K_D <= K`` is recovered.

    Ties count as failures: an input that only wins by the bit-order tie
    break is not reliably recoverable.
    """
    book = codebook(A.cols, lmax).restrict(bound)
    V, levels = book.vectors, book.levels
    check_product_guard(A.entries, V)
    out = recovery_outcomes(_kernels.matvec_rows(V, A.entries), levels)
    bad = np.flatnonzero(~out.recovered)
    if bad.size == 0:
        last = int(levels[-1]) if levels.size else None
        return ThresholdResult(lmax, None, last, None, len(book), 0)
    k = int(bad[0])
    fail_level = int(levels[k])
    below = levels[levels < fail_level]
    return ThresholdResult(
        budget=lmax,
        kstar_bits=fail_level - 1,
        last_recovered_level=int(below[-1]) if below.size else None,
        first_failure=_failure_record(book, out, k),
        inputs_checked=len(book),
        failures=int(bad.size),
    )
