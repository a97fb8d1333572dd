import numpy as np
import pytest

from mkcslab.census import sample_matrix
from mkcslab.language import Walsh, Zero, codebook, kd
from mkcslab.linalg import SmallMatrix
from mkcslab.solver import kstar, mkcs, recovery_check, simplest_null_vector
from mkcslab.walsh import walsh_system

from oracles import grid, oracle_kd, scalar_matvec


def binary(rows):
    return SmallMatrix(np.array(rows), "binary")


ZERO_2x3 = binary([[0, 0, 0], [0, 0, 0]])
SELECT_3 = binary([[1, 0, 0], [0, 1, 0], [0, 0, 1]])


class TestMkcs:
    def test_zero_output_gives_zero(self):
        res = mkcs(binary([[1, 1]]), [0], 10)
        assert res.to_dict() == {"status": "found", "xhat": [0, 0], "kd_bits": 3, "ambiguous": False}

    def test_simpler_solution_wins(self):
        A = binary([[1, 0, 0], [0, 1, 0]])
        x = np.array([0, 0, 5])
        res = mkcs(A, A.entries @ x, 14)
        assert res.xhat.tolist() == [0, 0, 0] and res.kd_bits == 3
        assert kd(x, 14).kd_bits > res.kd_bits

    def test_walsh_orthogonality_failure(self):
        W = walsh_system(4).rows
        A = SmallMatrix(W[1:4], "sign")
        assert (A.entries @ W[0] == 0).all()
        res = mkcs(A, [0, 0, 0], 10)
        assert res.xhat.tolist() == [0, 0, 0, 0]
        assert res.kd_bits == 3 < kd(W[0], 10).kd_bits == 5

    def test_invertible_recovers(self):
        x = np.array([2, -1, 0])
        res = mkcs(SELECT_3, x, 20)
        assert res.xhat.tolist() == x.tolist() and not res.ambiguous

    def test_ambiguity_reported(self):
        # y = 1 on the row (1 1): (1,0) and (0,1) are both UNIT programs of equal length
        res = mkcs(binary([[1, 1]]), [1], 12)
        assert res.found and res.ambiguous
        assert res.xhat.sum() == 1

    def test_budget_exhausted(self):
        res = mkcs(SELECT_3, [97, 89, 83], 10)
        assert res.status == "budget-exhausted" and res.xhat is None

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            mkcs(ZERO_2x3, [0, 0, 0], 10)

    def test_witness_is_consistent(self):
        A = binary([[1, 1, 0], [0, 1, 1]])
        res = mkcs(A, [3, 1], 16)
        assert scalar_matvec(A.entries, res.xhat) == [3, 1]
        assert kd(res.xhat, 16).kd_bits == res.kd_bits

    def test_deterministic(self):
        A = sample_matrix(2, 4, 3, 0)
        for y in ([0, 0], [1, 2], [3, -1]):
            assert mkcs(A, y, 16).to_dict() == mkcs(A, y, 16).to_dict()


class TestSimplestNullVector:
    def test_full_rank_square(self):
        for L in (6, 12, 18):
            assert simplest_null_vector(SELECT_3, L).status == "budget-exhausted"

    def test_ones_row(self):
        res = simplest_null_vector(binary([[1, 1]]), 12)
        assert res.kd_bits == 4 and res.witness == Walsh(1)
        assert res.vector.tolist() == [1, -1]
        # oracle: minimum kd over all grid solutions of z1 + z2 = 0
        best = min(oracle_kd(z, 12) for z in grid(2, 3) if any(z) and z[0] + z[1] == 0
                   if oracle_kd(z, 12) is not None)
        assert best == 4

    def test_zero_matrix(self):
        res = simplest_null_vector(ZERO_2x3, 12)
        assert res.kd_bits == 6
        nonzero_levels = [lv for v, (lv, _) in _table(3, 12).items() if any(v)]
        assert res.kd_bits == min(nonzero_levels)

    def test_never_returns_zero(self):
        for i in range(20):
            A = sample_matrix(2, 3, 5, i)
            res = simplest_null_vector(A, 14)
            if res.found:
                assert res.vector.any()
                assert scalar_matvec(A.entries, res.vector) == [0, 0]


def _table(n, lmax):
    from oracles import first_programs
    return first_programs(n, lmax)


class TestKstar:
    def test_invertible_never_fails(self):
        res = kstar(SELECT_3, 14)
        assert res.kstar_bits is None and res.kstar_label == ">= 14"

    def test_zero_matrix(self):
        res = kstar(ZERO_2x3, 12)
        # 0^n is the only recovered input; the first failure sits on the next
        # occupied level (6 bits), so the threshold is 6 - 1.
        assert res.last_recovered_level == 3
        assert res.kstar_bits == 5
        assert res.first_failure["xhat"] == [0, 0, 0]
        assert res.first_failure["x_kd_bits"] == 6

    def test_matches_per_input_loop(self):
        for i in range(6):
            A = sample_matrix(2, 3, 21, i)
            lmax = 13
            book = codebook(3, lmax)
            fails = []
            for k in range(len(book)):
                x = book.vectors[k]
                r = mkcs(A, A.entries @ x, lmax)
                if r.ambiguous or r.xhat.tolist() != x.tolist():
                    fails.append(int(book.levels[k]))
            res = kstar(A, lmax)
            expected = min(fails) - 1 if fails else None
            assert res.kstar_bits == expected
            assert res.failures == len(fails)

    def test_lemma1_consistency(self):
        lmax = 20
        for i in range(15):
            A = sample_matrix(2, 4, 8, i)
            s = simplest_null_vector(A, lmax)
            res = kstar(A, lmax)
            if s.found and res.kstar_bits is not None:
                assert res.kstar_bits >= (s.kd_bits - 9) / 2 - 1

    def test_deterministic(self):
        A = sample_matrix(3, 4, 1, 2)
        assert kstar(A, 15).to_dict() == kstar(A, 15).to_dict()


def test_recovery_check_monotone():
    for i in range(10):
        A = sample_matrix(2, 4, 4, i)
        oks = [recovery_check(A, L, 16)[0] for L in range(3, 17)]
        # once a level fails, every higher level fails too
        first_bad = oks.index(False) if False in oks else len(oks)
        assert all(oks[:first_bad]) and not any(oks[first_bad:])


def test_soundness_against_true_input():
    rng = np.random.default_rng(5)
    book = codebook(4, 16)
    for i in range(60):
        A = sample_matrix(2, 4, 9, i)
        k = int(rng.integers(len(book)))
        x = book.vectors[k]
        y = A.entries @ x
        res = mkcs(A, y, 16)
        assert res.found
        assert scalar_matvec(A.entries, res.xhat) == y.tolist()
        assert res.kd_bits <= int(book.levels[k])


def test_lemma1_concretized():
    lmax = 16
    book = codebook(3, lmax)
    for i in range(12):
        A = sample_matrix(1, 3, 13, i)
        s = simplest_null_vector(A, 30)
        if not s.found:
            continue
        Y = book.vectors @ A.entries.T
        for k in range(len(book)):
            sols = np.flatnonzero((Y == Y[k]).all(axis=1))
            for j in sols:
                if j != k:
                    assert book.levels[j] >= s.kd_bits - 9 - book.levels[k]


def test_oracle_equivalence_small_grid():
    rng = np.random.default_rng(2024)
    lmax = 18
    pts = [np.array(z) for z in grid(3, 2)]
    for i in range(25):
        A = binary(rng.integers(0, 2, size=(2, 3)))
        x = pts[int(rng.integers(len(pts)))]
        y = scalar_matvec(A.entries, x)
        cands = [oracle_kd(z, lmax) for z in pts if scalar_matvec(A.entries, z) == y]
        cands = [c for c in cands if c is not None]
        res = mkcs(A, y, lmax, bound=2)
        if cands:
            assert res.found and res.kd_bits == min(cands)
        else:
            assert not res.found


def test_zero_program_is_unique_three_bit_output():
    book = codebook(5, 10)
    assert book.levels[0] == 3 and not book.vectors[0].any()
    assert book.witness(0) == Zero()
