import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extremal_cem.linalg import (
    DimensionTooLarge,
    MAX_PERMANENT_DIM,
    charpoly_exact,
    det_exact,
    format_matrix,
    parse_matrix,
    permanent,
    permanent_naive,
    poly_eval,
    read_matrix,
    sym_eigenvalues,
    write_matrix,
)

from conftest import brualdi_cao

int_matrices = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=n, max_size=n)
)
binary_matrices = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=n, max_size=n)
)


def leibniz_det(m):
    n = len(m)
    total = 0
    for p in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        total += (-1) ** inv * math.prod(m[i][p[i]] for i in range(n))
    return total


def symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return a + a.T


class TestEigenvalues:
    @pytest.mark.parametrize("n", [1, 2, 3, 7, 19, 40, 120])
    def test_agree_with_lapack(self, rng, n):
        a = symmetric(rng, n)
        assert np.allclose(sym_eigenvalues(a), np.linalg.eigvalsh(a)[::-1], atol=1e-10)

    def test_descending(self, rng):
        ev = sym_eigenvalues(symmetric(rng, 12))
        assert np.all(np.diff(ev) <= 0)

    @pytest.mark.parametrize("n", [2, 5, 30])
    def test_trace_identity(self, rng, n):
        a = symmetric(rng, n)
        assert abs(sym_eigenvalues(a).sum() - np.trace(a)) < 1e-8 * n * np.abs(a).max()

    def test_known_spectra(self):
        # path on 3 vertices: +-sqrt(2), 0
        ev = sym_eigenvalues([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
        assert np.allclose(ev, [math.sqrt(2), 0, -math.sqrt(2)], atol=1e-12)
        assert np.allclose(sym_eigenvalues(np.ones((4, 4))), [4, 0, 0, 0], atol=1e-12)

    def test_diagonal_and_zero(self):
        assert list(sym_eigenvalues(np.diag([3.0, -1.0, 2.0]))) == [3.0, 2.0, -1.0]
        assert list(sym_eigenvalues(np.zeros((3, 3)))) == [0.0, 0.0, 0.0]

    def test_tiny_offdiagonal_is_harmless(self):
        a = np.zeros((4, 4))
        a[0, 1] = a[1, 0] = 1e-310
        with np.errstate(all="raise"):
            assert np.all(sym_eigenvalues(a) == 0)

    def test_lapack_method(self, rng):
        a = symmetric(rng, 6)
        assert np.allclose(sym_eigenvalues(a, method="lapack"), sym_eigenvalues(a), atol=1e-10)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            sym_eigenvalues([[0, 1], [2, 0]])
        with pytest.raises(ValueError):
            sym_eigenvalues(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            sym_eigenvalues(np.eye(2), method="qr")


class TestExactKernels:
    @given(int_matrices)
    def test_det_matches_leibniz(self, m):
        assert det_exact(m) == leibniz_det(m)

    @given(int_matrices)
    def test_charpoly_constant_term_is_det(self, m):
        assert charpoly_exact(m)[0] == det_exact(m)

    @given(int_matrices)
    def test_charpoly_matches_determinant_at_points(self, m):
        # det(A - xI) evaluated at integer x
        coeffs = charpoly_exact(m)
        n = len(m)
        for x in (-2, 1, 3):
            shifted = [[m[i][j] - (x if i == j else 0) for j in range(n)] for i in range(n)]
            assert poly_eval(coeffs, x) == det_exact(shifted)

    def test_charpoly_leading_sign(self):
        assert charpoly_exact([[1, 2], [3, 4]]) == [-2, -5, 1]
        assert charpoly_exact([[2]]) == [2, -1]

    def test_det_singular_and_swaps(self):
        assert det_exact([[1, 2], [2, 4]]) == 0
        assert det_exact([[0, 1], [1, 0]]) == -1
        assert det_exact([[0, 0, 1], [0, 1, 0], [1, 0, 0]]) == -1

    def test_big_integers_stay_exact(self):
        m = [[10**12, 1], [1, 10**12]]
        assert det_exact(m) == 10**24 - 1


class TestPermanent:
    @given(binary_matrices)
    def test_ryser_matches_naive(self, m):
        assert permanent(m) == permanent_naive(m)

    def test_all_ones_is_factorial(self):
        for n in (1, 4, 8, 11):
            assert permanent(np.ones((n, n), dtype=int)) == math.factorial(n)

    def test_identity_and_zero_row(self):
        assert permanent(np.eye(12, dtype=int)) == 1
        m = np.ones((5, 5), dtype=int)
        m[2] = 0
        assert permanent(m) == 0

    def test_brualdi_cao_family_is_fibonacci_minus_one(self):
        fib = [0, 1]
        while len(fib) < 20:
            fib.append(fib[-1] + fib[-2])
        assert permanent(brualdi_cao(5)) == 12
        for n in range(2, 16):
            assert permanent(brualdi_cao(n)) == fib[n + 2] - 1

    def test_dense_large_uses_ryser_path(self, rng):
        m = (rng.random((13, 13)) < 0.8).astype(int)
        # expansion along the first row reduces to 12 x 12 permanents
        expect = sum(
            permanent(np.delete(np.delete(m, 0, 0), j, 1)) for j in range(13) if m[0, j]
        )
        assert permanent(m) == expect

    def test_limits(self):
        with pytest.raises(DimensionTooLarge):
            permanent(np.eye(MAX_PERMANENT_DIM + 1, dtype=int))
        with pytest.raises(ValueError):
            permanent([[2]])


class TestMatrixText:
    def test_round_trip(self, tmp_path):
        m = [[1, 0, 1], [0, 1, 1], [1, 1, 0]]
        assert parse_matrix(format_matrix(m)) == m
        p = tmp_path / "m.txt"
        write_matrix(p, m)
        assert read_matrix(p) == m

    def test_errors_carry_line_numbers(self):
        with pytest.raises(ValueError, match="line 3"):
            parse_matrix("2\n1 0\n1 x\n")
        with pytest.raises(ValueError, match="line 2"):
            parse_matrix("2\n1 0 1\n1 0\n")
        with pytest.raises(ValueError, match="line 1"):
            parse_matrix("two\n")
        with pytest.raises(ValueError, match="line 4"):
            parse_matrix("2\n1 0\n0 1\n1 1\n")
