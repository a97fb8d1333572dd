"""Sylvester-Hadamard matrices, sequency-ordered Walsh functions, and the
census of (matrix, input, output) triples over Walsh-row matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterator

import numpy as np

from .linalg import SmallMatrix

MAX_HADAMARD_K = 6  # order 64
MAX_CENSUS_N = 16


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def hadamard(k: int) -> np.ndarray:
    """Sylvester-Hadamard matrix of order ``2**k``."""
    if k < 0 or k > MAX_HADAMARD_K:
        raise ValueError(f"k must be in 0..{MAX_HADAMARD_K}, got {k}")
    H = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        H = np.block([[H, H], [H, -H]])
    return H


def sign_changes(row: np.ndarray) -> int:
    row = np.asarray(row)
    return int(np.count_nonzero(row[1:] != row[:-1]))


@dataclass(frozen=True, eq=False)
class WalshSystem:
    n: int
    rows: np.ndarray = field(repr=False)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.rows[i]

    def __len__(self) -> int:
        return self.n

    def as_matrix(self) -> SmallMatrix:
        return SmallMatrix(self.rows, "sign")


def sequency_order(H: np.ndarray) -> WalshSystem:
    """Sort the rows of a Hadamard matrix by their number of sign changes."""
    H = np.asarray(H, dtype=np.int64)
    n = H.shape[0]
    if H.shape != (n, n) or not np.isin(H, (-1, 1)).all():
        raise ValueError("expected a square +-1 matrix")
    if not np.array_equal(H @ H.T, n * np.eye(n, dtype=np.int64)):
        raise ValueError("matrix is not Hadamard")
    changes = [sign_changes(r) for r in H]
    if len(set(changes)) != n:
        raise ValueError(f"sequency tie among rows (counts {changes}); not a Sylvester matrix")
    order = np.argsort(changes, kind="stable")
    rows = H[order].copy()
    rows.setflags(write=False)
    return WalshSystem(n, rows)


@lru_cache(maxsize=None)
def walsh_system(n: int) -> WalshSystem:
    if not is_power_of_two(n):
        raise ValueError(f"Walsh functions need n to be a power of two, got {n}")
    return sequency_order(hadamard(n.bit_length() - 1))


def walsh_function(n: int, i: int) -> np.ndarray:
    """The i-th Walsh function of length n (0-based; w_0 is all ones)."""
    if not 0 <= i < n:
        raise IndexError(f"Walsh index {i} out of range for n={n}")
    return walsh_system(n)[i]


def walsh_family(n: int, d: int) -> Iterator[tuple[tuple[int, ...], SmallMatrix]]:
    """Every d-subset of Walsh rows, as (row indices, sign matrix), lexicographically."""
    if not is_power_of_two(n):
        raise ValueError(f"n must be a power of two, got {n}")
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    W = walsh_system(n).rows
    for idx in itertools.combinations(range(n), d):
        yield idx, SmallMatrix(W[list(idx)], "sign")


# --- triple census ---------------------------------------------------------

@dataclass
class TripleCensusReport:
    n: int
    d: int
    level: int
    lmax: int
    family_size: int
    inputs: int
    triples: int
    zero_output_triples: int
    walsh_multiples: int
    walsh_multiple_zero_triples: int
    annihilated_per_multiple: list[int]
    expected_annihilated: int
    ratio: str
    ratio_identity_holds: bool
    failures: int  # solver answer is unique and differs from x
    ties: int  # solver flagged an equally short rival solution
    tie_losses: int  # ties where the bit-order tie break picked the rival
    failures_without_simpler_competitor: int
    pigeonhole_lower_bound: float
    eta_hat: float
    eta_hat_with_ties: float
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def level_rows(self) -> list[dict]:
        return [
            {
                "n": self.n,
                "d": self.d,
                "level": self.level,
                "triples": self.triples,
                "zero_output_triples": self.zero_output_triples,
                "walsh_multiples": self.walsh_multiples,
                "failures": self.failures,
                "ties": self.ties,
                "tie_losses": self.tie_losses,
                "eta_hat": self.eta_hat,
                "eta_hat_with_ties": self.eta_hat_with_ties,
            }
        ]


def walsh_multiple_index(x: np.ndarray, n: int) -> int:
    """Index i if x is a nonzero multiple of w_i, else -1."""
    if not x.any():
        return -1
    W = walsh_system(n).rows
    c = x[0]  # every Sylvester row starts with +1
    if c == 0:
        return -1
    hits = np.flatnonzero((W * c == x).all(axis=1))
    return int(hits[0]) if hits.size else -1


def theorem3_census(n: int, d: int, level: int, lmax: int | None = None,
                    bound: int | None = None) -> TripleCensusReport:
    """Exhaustive census of triples (A, x, Ax) with A a Walsh-row matrix and
    K_D(x) <= level.

    Recovery is decided by the minimum-complexity solver over the same
    enumerated candidates. A triple *fails* when the solver's answer is
    unique and differs from x; triples whose answer is tied at the minimal
    length are counted separately (``ties``, ``tie_losses``), and
    ``eta_hat_with_ties`` adds the tie losses back in.
    """
    from .language import codebook
    from .solver import recovery_outcomes

    lmax = level if lmax is None else lmax
    if not is_power_of_two(n) or n > MAX_CENSUS_N:
        raise ValueError(f"n must be a power of two <= {MAX_CENSUS_N}, got {n}")
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    if level > lmax:
        raise ValueError(f"level {level} exceeds budget {lmax}")

    book = codebook(n, lmax).restrict(bound)
    V, levels = book.vectors_upto(level)
    m = V.shape[0]
    family = list(walsh_family(n, d))
    M = len(family)

    multiples = np.array([walsh_multiple_index(v, n) for v in V], dtype=np.int64)
    mult_rows = np.flatnonzero(multiples >= 0)
    annihilated = np.zeros(m, dtype=np.int64)

    zero_triples = 0
    failures = ties = tie_losses = no_simpler = 0
    pigeon = 0
    for idx, A in family:
        Y = V @ A.entries.T
        zero = ~Y.any(axis=1)
        zero_triples += int(zero.sum())
        pigeon += max(int(zero.sum()) - 1, 0)
        annihilated += zero
        out = recovery_outcomes(Y, levels)
        lost = out.winner != np.arange(m)
        failed = lost & ~out.ambiguous
        failures += int(failed.sum())
        ties += int(out.ambiguous.sum())
        tie_losses += int((lost & out.ambiguous).sum())
        no_simpler += int((levels[out.winner[failed]] >= levels[failed]).sum())

    per_mult = annihilated[mult_rows].tolist()
    expected = comb(n - 1, d)
    ratio = Fraction(comb(n - 1, d), comb(n, d))
    triples = M * m
    eta = failures / triples if triples else 0.0
    eta_ties = (failures + tie_losses) / triples if triples else 0.0
    pigeon_bound = pigeon / triples if triples else 0.0
    checks = {
        "annihilated_per_multiple": all(c == expected for c in per_mult),
        "ratio_identity": ratio == 1 - Fraction(d, n),
        "zero_vector_triples": m == 0 or int(annihilated[0]) == M,
        "multiple_zero_count_closed_form": int(annihilated[mult_rows].sum()) == len(mult_rows) * expected,
        "eta_at_least_pigeonhole": failures >= pigeon,
        "failures_have_simpler_competitor": no_simpler == 0,
        "eta_positive_once_walsh_enters": level < 3 + (n - 1).bit_length() or failures > 0,
    }
    return TripleCensusReport(
        n=n, d=d, level=level, lmax=lmax, family_size=M, inputs=m, triples=triples,
        zero_output_triples=zero_triples,
        walsh_multiples=len(mult_rows),
        walsh_multiple_zero_triples=int(annihilated[mult_rows].sum()),
        annihilated_per_multiple=per_mult,
        expected_annihilated=expected,
        ratio=f"{ratio.numerator}/{ratio.denominator}",
        ratio_identity_holds=checks["ratio_identity"],
        failures=failures, ties=ties, tie_losses=tie_losses,
        failures_without_simpler_competitor=no_simpler,
        pigeonhole_lower_bound=pigeon_bound,
        eta_hat=eta, eta_hat_with_ties=eta_ties, checks=checks,
    )
