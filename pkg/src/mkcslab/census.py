"""Counting experiments over binary matrices.

* ``lemma2_sweep``: exhaustive annihilator counts on a small integer grid.
* ``theorem1_nullspace_census``: how often a binary matrix has a cheap
  nonzero null vector, against the union bound ``2^(L+1-d)``.
* ``theorem1_recovery_census``: how often every cheap input is recovered.
* ``theorem2_table``: the full output table over binary inputs and the
  stale-entry counting behind the converse bound.

Sampled runs draw matrix ``i`` from ``substream(seed, i)``, so results do not
depend on the number of workers.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, TypeVar

import numpy as np

from .language import codebook
from .linalg import SmallMatrix, annihilator_count
from .reports import CensusReport, substream
from .solver import recovery_check, simplest_null_vector

T = TypeVar("T")

MAX_LEMMA2_N = 4
MAX_LEMMA2_B = 2
MAX_EXHAUSTIVE_BITS = 16  # d*n for enumerating every binary matrix
MAX_TABLE_BITS = 24  # d*n + n for the output table
SIGMAS = 3


def default_workers() -> int:
    env = os.environ.get("MKCSLAB_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map(fn: Callable[[int], T], items: Sequence[int], workers: int | None) -> list[T]:
    workers = default_workers() if workers is None else max(1, workers)
    if workers == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sample_matrix(d: int, n: int, seed: int, i: int) -> SmallMatrix:
    return SmallMatrix(substream(seed, i).integers(0, 2, size=(d, n)), "binary")


def _matrix_source(d: int, n: int, mode: str, samples: int, seed: int):
    if mode == "exhaustive":
        if d * n > MAX_EXHAUSTIVE_BITS:
            raise ValueError(f"exhaustive mode needs d*n <= {MAX_EXHAUSTIVE_BITS}, got {d * n}")
        return 1 << (d * n), lambda i: SmallMatrix.from_bits(i, d, n)
    if mode != "sampled":
        raise ValueError(f"mode must be 'sampled' or 'exhaustive', got {mode!r}")
    if samples < 1:
        raise ValueError("sample size must be >= 1")
    return samples, lambda i: sample_matrix(d, n, seed, i)


def _sigma(p: float, total: int, mode: str) -> float:
    if mode == "exhaustive":
        return 0.0
    p = min(max(p, 0.0), 1.0)
    return math.sqrt(p * (1 - p) / total)


# --- Lemma 2 ---------------------------------------------------------------

def lemma2_sweep(n: int, B: int) -> CensusReport:
    """Annihilator count of every nonzero x in {-B..B}^n against 2^(n-1)."""
    if not 2 <= n <= MAX_LEMMA2_N:
        raise ValueError(f"n must be in 2..{MAX_LEMMA2_N} for full exhaustion, got {n}")
    if B > MAX_LEMMA2_B:
        raise ValueError(f"B must be <= {MAX_LEMMA2_B} for full exhaustion, got {B}")
    if B < 1:
        raise ValueError(f"grid {{-{B}..{B}}}^{n} has no nonzero vectors")
    bound = 1 << (n - 1)
    hist: dict[int, int] = {}
    best, witnesses, violations = -1, [], []
    vectors = 0
    for x in itertools.product(range(-B, B + 1), repeat=n):
        if not any(x):
            continue
        vectors += 1
        c = annihilator_count(np.array(x, dtype=np.int64))
        hist[c] = hist.get(c, 0) + 1
        if c > bound:
            violations.append(list(x))
        if c > best:
            best, witnesses = c, [list(x)]
        elif c == best:
            witnesses.append(list(x))
    return CensusReport(
        kind="lemma2",
        params={"n": n, "B": B},
        results={
            "vectors": vectors,
            "max_count": best,
            "bound": bound,
            "witnesses": witnesses,
            "violations": violations,
            "tight": best == bound,
        },
        checks={"count_le_bound": not violations},
        rows=[{"count": c, "vectors": hist[c], "bound": bound} for c in sorted(hist)],
    )


# --- Theorem 1: null-space census -------------------------------------------

def union_bound(level: int, d: int) -> float:
    return min(1.0, 2.0 ** (level + 1 - d))


def theorem1_nullspace_census(d: int, n: int, level: int, samples: int = 1000,
                              seed: int = 0, mode: str = "sampled",
                              workers: int | None = None) -> CensusReport:
    """Fraction of binary d x n matrices whose null space holds a nonzero
    vector with K_D <= level, at every level up to ``level``."""
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    if level < 0:
        raise ValueError("level must be nonnegative")
    total, make = _matrix_source(d, n, mode, samples, seed)
    budget = max(level, 3)
    codebook(n, budget)  # build once before fanning out

    def probe(i: int):
        res = simplest_null_vector(make(i), budget)
        if res.found and res.kd_bits <= level:
            return res.kd_bits, res
        return None, None

    probes = _map(probe, range(total), workers)
    levels = [lv for lv, _ in probes]
    first = next((i for i, lv in enumerate(levels) if lv is not None), None)

    rows = []
    cum = 0
    for L in range(0, level + 1):
        hits = sum(1 for lv in levels if lv == L)
        cum += hits
        frac = cum / total
        b = union_bound(L, d)
        sig = _sigma(b, total, mode)
        rows.append({"level": L, "new": hits, "count": cum, "fraction": frac,
                     "bound": b, "sigma": sig, "pass": frac <= b + SIGMAS * sig})
    final = rows[-1]
    witness = None
    if first is not None:
        res = probes[first][1]
        witness = {"matrix_index": first, "matrix": make(first).entries.tolist(),
                   "z": [int(v) for v in res.vector], "kd_bits": res.kd_bits,
                   "witness_bits": res.to_dict()["witness_bits"],
                   "witness": res.to_dict()["witness"]}
    fracs = [r["fraction"] for r in rows]
    return CensusReport(
        kind="nullspace",
        mode=mode,
        params={"d": d, "n": n, "level": level, "samples": total, "seed": seed,
                "budget": budget},
        results={
            "matrices": total,
            "with_null_vector": final["count"],
            "fraction": final["fraction"],
            "bound": final["bound"],
            "sigma": final["sigma"],
            "slack": final["bound"] + SIGMAS * final["sigma"] - final["fraction"],
            "first_witness": witness,
        },
        checks={
            "fraction_within_bound": all(r["pass"] for r in rows),
            "fraction_monotone_in_level": all(a <= b for a, b in zip(fracs, fracs[1:])),
            "fractions_in_unit_interval": all(0 <= f <= 1 for f in fracs),
        },
        rows=rows,
    )


# --- Theorem 1: recovery census ---------------------------------------------

LEMMA1_OVERHEAD = 9  # SUM + SCALE(-1, .) opcodes and the -1 payload


def lemma1_level(level: int) -> int:
    """Null-vector complexity that guarantees recovery of every input up to ``level``."""
    return 2 * level + LEMMA1_OVERHEAD + 1


def theorem1_recovery_census(d: int, n: int, level: int, samples: int = 200,
                             seed: int = 0, lmax: int | None = None,
                             mode: str = "sampled", bound: int | None = None,
                             workers: int | None = None) -> CensusReport:
    """Fraction of matrices for which every input with K_D <= level is
    recovered uniquely, cross-checked against the null-vector guarantee."""
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    lmax = lemma1_level(level) - 1 if lmax is None else lmax
    if level > lmax:
        raise ValueError(f"level {level} exceeds budget {lmax}")
    if level < 3:
        raise ValueError("level must be at least 3 bits")
    total, make = _matrix_source(d, n, mode, samples, seed)
    need = lemma1_level(level)
    codebook(n, lmax)

    def check(i: int):
        A = make(i)
        ok, failure = recovery_check(A, level, lmax, bound)
        s = simplest_null_vector(A, lmax)
        s_level = s.kd_bits if s.found else None
        guaranteed = (s_level >= need) if s.found else lmax >= need - 1
        return ok, failure, s_level, guaranteed

    results = _map(check, range(total), workers)
    passing = sum(ok for ok, *_ in results)
    guaranteed = sum(g for *_, g in results)
    violations = [i for i, (ok, _, _, g) in enumerate(results) if g and not ok]
    first_fail = next((i for i, r in enumerate(results) if not r[0]), None)

    frac = passing / total
    lower = 1.0 - union_bound(need - 1, d)
    sig = _sigma(1.0 - lower, total, mode)
    by_null: dict = {}
    for ok, _, s_level, g in results:
        key = "none" if s_level is None else s_level
        row = by_null.setdefault(key, {"null_level": key, "matrices": 0, "recovered": 0,
                                       "guaranteed": g})
        row["matrices"] += 1
        row["recovered"] += int(ok)
    rows = sorted(by_null.values(), key=lambda r: (r["null_level"] == "none",
                                                   r["null_level"] if r["null_level"] != "none" else 0))
    witness = None
    if first_fail is not None:
        witness = {"matrix_index": first_fail, "matrix": make(first_fail).entries.tolist(),
                   **results[first_fail][1]}
    return CensusReport(
        kind="recovery",
        mode=mode,
        params={"d": d, "n": n, "level": level, "samples": total, "seed": seed,
                "lmax": lmax, "bound": bound},
        results={
            "matrices": total,
            "recovered_all": passing,
            "fraction": frac,
            "lemma1_null_level": need,
            "lemma1_guaranteed": guaranteed,
            "lemma1_violations": violations,
            "lower_bound": lower,
            "sigma": sig,
            "first_failure": witness,
        },
        checks={
            "lemma1_implication": not violations,
            "fraction_above_bound": frac >= lower - SIGMAS * sig,
        },
        rows=rows,
    )


# --- Theorem 2: output table --------------------------------------------------

@dataclass
class OutputTable:
    d: int
    n: int
    y: np.ndarray  # (M, m, d): y[i, j] = A_i x_j
    stale: np.ndarray  # (M, m): y[i, j] already appeared in row i before column j
    distinct_outputs: int

    @property
    def M(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[1]

    def stale_counts(self) -> np.ndarray:
        return self.stale.sum(axis=0)

    def stale_fraction(self) -> list[Fraction]:
        return [Fraction(int(c), self.M) for c in self.stale_counts()]


def binary_inputs(n: int) -> np.ndarray:
    """All binary n-tuples in lexicographic order."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return (np.arange(1 << n, dtype=np.int64)[:, None] >> shifts) & 1


def build_output_table(d: int, n: int) -> OutputTable:
    if d < 1 or n < 1:
        raise ValueError("d and n must be positive")
    if d * n + n > MAX_TABLE_BITS:
        raise ValueError(f"table needs 2^(dn) * 2^n <= 2^{MAX_TABLE_BITS}, got 2^{d * n + n}")
    X = binary_inputs(n)  # (m, n)
    mats = binary_inputs(d * n).reshape(-1, d, n)  # (M, d, n), row-major bit order
    Y = np.einsum("idk,jk->ijd", mats, X)
    keys = (Y * (n + 1) ** np.arange(d, dtype=np.int64)).sum(axis=2)
    order = np.argsort(keys, axis=1, kind="stable")
    sk = np.take_along_axis(keys, order, axis=1)
    repeat = np.zeros_like(sk, dtype=bool)
    repeat[:, 1:] = sk[:, 1:] == sk[:, :-1]
    stale = np.zeros_like(repeat)
    np.put_along_axis(stale, order, repeat, axis=1)
    return OutputTable(d, n, Y, stale, int(np.unique(keys).size))


def theorem2_table(d: int, n: int, alpha: float = 0.5) -> tuple[OutputTable, CensusReport]:
    """Exhaustive output table and the column-counting bound N <= |S| / (1 - alpha)."""
    a = Fraction(str(alpha))
    if not 0 < a < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    table = build_output_table(d, n)
    M, m = table.M, table.m
    counts = table.stale_counts()
    low = [j for j in range(m) if counts[j] < a * M]
    n_alpha = len(low)
    S = table.distinct_outputs
    marks_per_row = (~table.stale[:, low]).sum(axis=1) if low else np.zeros(M, dtype=np.int64)
    total_marks = int(marks_per_row.sum())
    max_row_marks = int(marks_per_row.max(initial=0))
    abar = 1 - a
    first_heavy = next((j for j in range(m) if counts[j] >= a * M), None)
    X = binary_inputs(n)
    rows = [{"column": j, "x": "".join(map(str, X[j])), "stale": int(counts[j]),
             "stale_fraction": float(Fraction(int(counts[j]), M)), "below_alpha": j in low}
            for j in range(m)]
    report = CensusReport(
        kind="table",
        params={"d": d, "n": n, "alpha": float(a)},
        results={
            "matrices": M,
            "inputs": m,
            "distinct_outputs": S,
            "output_bound": (n + 1) ** d,
            "n_alpha": n_alpha,
            "n_alpha_bound": float(Fraction(S) / abar),
            "total_marks": total_marks,
            "min_total_marks": math.ceil(abar * M) * n_alpha,
            "max_row_marks": max_row_marks,
            "first_column_at_alpha": first_heavy,
        },
        checks={
            "distinct_outputs_bound": S <= (n + 1) ** d,
            "n_alpha_bound": n_alpha <= Fraction(S) / abar,
            "total_marks": total_marks >= math.ceil(abar * M) * n_alpha,
            "row_with_enough_marks": max_row_marks >= abar * n_alpha,
            "first_column_fresh": int(counts[0]) == 0,
        },
        rows=rows,
    )
    return table, report
