import pytest
from hypothesis import given
from hypothesis import strategies as st

from streamdiff.fib import (
    FibOverflowError,
    FibTable,
    char_poly,
    fib_k,
    fib_sum,
    phi,
    q_at_phi,
)


def naive_fib(k, i):
    """Straight from the recurrence, no table, no windowing."""
    if i <= 0:
        return 0
    if i == 1:
        return 1
    return sum(naive_fib(k, i - j) for j in range(1, k + 1))


PUBLISHED = {
    2: (1.61803, 2.23607),
    3: (1.83929, 2.97417),
    4: (1.92756, 3.40352),
    5: (1.96595, 3.65468),
    6: (1.98358, 3.80162),
}


class TestFibK:
    def test_zero_and_negative(self):
        assert fib_k(2, 0) == 0
        assert fib_k(5, -7) == 0

    def test_classic(self):
        assert [fib_k(2, i) for i in range(1, 8)] == [1, 1, 2, 3, 5, 8, 13]

    def test_tetranacci(self):
        assert [fib_k(4, i) for i in range(1, 9)] == [1, 1, 2, 4, 8, 15, 29, 56]

    @pytest.mark.parametrize("k", range(2, 7))
    def test_matches_naive_recurrence(self, k):
        assert [fib_k(k, i) for i in range(-3, 18)] == [naive_fib(k, i) for i in range(-3, 18)]

    @pytest.mark.parametrize("k", range(2, 9))
    def test_powers_of_two_prefix(self, k):
        assert [fib_k(k, i) for i in range(2, k + 2)] == [2 ** (i - 2) for i in range(2, k + 2)]

    @pytest.mark.parametrize("k", [1, 0, -3])
    def test_rejects_small_k(self, k):
        with pytest.raises(ValueError):
            fib_k(k, 3)

    def test_wide_values_exact(self):
        v = fib_k(6, 100)
        assert v > 2**64
        # reference computed with an independent window-free loop
        seq = [0] * 5 + [1]
        for _ in range(99):
            seq.append(sum(seq[-6:]))
        assert v == seq[-1]

    def test_overflow_is_reported(self):
        assert fib_k(2, 92, max_bits=64) == 7540113804746346429
        with pytest.raises(FibOverflowError):
            fib_k(2, 93, max_bits=64)

    @given(k=st.integers(2, 12), i=st.integers(2, 200))
    def test_telescoped_recurrence(self, k, i):
        assert fib_k(k, i + 1) == 2 * fib_k(k, i) - fib_k(k, i - k)

    @given(k=st.integers(2, 12), i=st.integers(1, 300))
    def test_positive_nondecreasing(self, k, i):
        assert 0 < fib_k(k, i) <= fib_k(k, i + 1)


class TestFibSum:
    def test_examples(self):
        assert fib_sum(2, 0) == 0
        assert fib_sum(2, 5) == 12
        assert fib_sum(4, 5) == 16

    @given(k=st.integers(2, 10), n=st.integers(1, 250))
    def test_difference_is_term(self, k, n):
        assert fib_sum(k, n) - fib_sum(k, n - 1) == fib_k(k, n)

    @given(n=st.integers(0, 300))
    def test_classic_identity(self, n):
        assert fib_sum(2, n) == fib_k(2, n + 2) - 1

    def test_table_lists(self):
        t = FibTable(3)
        assert t.values(6) == [1, 1, 2, 4, 7, 13]
        assert t.sums(6) == [1, 2, 4, 8, 15, 28]


class TestConstants:
    @pytest.mark.parametrize("k", sorted(PUBLISHED))
    def test_published_values(self, k):
        p, q = PUBLISHED[k]
        assert phi(k) == pytest.approx(p, abs=1e-5)
        assert q_at_phi(k) == pytest.approx(q, abs=1e-5)

    @pytest.mark.parametrize("k", range(2, 17))
    def test_root(self, k):
        assert 1 < phi(k) < 2
        assert abs(char_poly(k, phi(k))) <= 1e-10

    def test_increasing_towards_two(self):
        vals = [phi(k) for k in range(2, 18)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert 2 - vals[-1] < 1e-4

    def test_bisection_matches_polynomial_solver(self):
        np = pytest.importorskip("numpy")
        for k in range(2, 12):
            roots = np.roots([1] + [-1] * k)
            real = max(r.real for r in roots if abs(r.imag) < 1e-9)
            assert phi(k) == pytest.approx(real, abs=1e-10)

    @pytest.mark.parametrize("k", range(2, 7))
    def test_asymptotic_fidelity(self, k):
        p, q = phi(k), q_at_phi(k)
        for n in range(40, 120):
            f = fib_k(k, n)
            assert abs(f - p**n / q) / f < 1e-6
