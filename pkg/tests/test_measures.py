import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from colloc_cluster.measures import (
    SIMPLIFIED,
    BigramStats,
    InvalidStats,
    log_likelihood_ratio,
    measure_all,
    measure_arrays,
    pmi,
    t_stat,
)

import oracles

# -2 log(lambda) evaluated with mpmath at 50 digits (see oracles.g_squared for
# the float cross-check): frozen here so the test does not need mpmath.
LLR_10_20_20_1000 = 56.755379439307861
LLR_10_10_10_1000 = 112.00306870969468


@st.composite
def tables(draw, max_n=10_000):
    n = draw(st.integers(1, max_n))
    c1 = draw(st.integers(1, n))
    c2 = draw(st.integers(1, n))
    lo = max(1, c1 + c2 - n)
    hi = min(c1, c2)
    assume(lo <= hi)
    c12 = draw(st.integers(lo, hi))
    return BigramStats(c12, c1, c2, n)


class TestPMI:
    def test_independence(self):
        assert pmi(BigramStats(1, 10, 10, 100)) == 0.0

    def test_log2_25(self):
        assert pmi(BigramStats(10, 20, 20, 1000)) == pytest.approx(4.643856, abs=1e-6)
        assert pmi(BigramStats(10, 20, 20, 1000)) == pytest.approx(oracles.pmi(10, 20, 20, 1000), abs=1e-12)

    def test_always_follows(self):
        assert pmi(BigramStats(5, 5, 5, 100)) == pytest.approx(4.321928, abs=1e-6)

    def test_zero_joint_is_a_domain_error(self):
        with pytest.raises(InvalidStats):
            pmi(BigramStats(0, 5, 5, 100))

    @given(tables(max_n=500), st.integers(2, 50))
    def test_scale_invariance(self, s, m):
        scaled = BigramStats(s.c12 * m, s.c1 * m, s.c2 * m, s.N * m)
        assert pmi(scaled) == pytest.approx(pmi(s), abs=1e-12)


class TestTStat:
    def test_independence(self):
        assert t_stat(BigramStats(1, 10, 10, 100)) == 0.0

    def test_full_and_simplified_variance(self):
        s = BigramStats(10, 20, 20, 1000)
        assert t_stat(s) == pytest.approx(3.0511, abs=1e-4)
        assert t_stat(s, SIMPLIFIED) == pytest.approx(3.0358, abs=1e-4)
        assert t_stat(s) == pytest.approx(oracles.t_stat(10, 20, 20, 1000), abs=1e-12)
        assert t_stat(s, SIMPLIFIED) == pytest.approx(
            oracles.t_stat(10, 20, 20, 1000, simplified=True), abs=1e-12
        )

    def test_degenerate_variance_is_flagged(self):
        s = BigramStats(2, 2, 2, 2)
        mv = measure_all(s)
        assert mv.t_degenerate
        # c12 == N forces c1 == c2 == N, so the numerator is zero too
        assert mv.t == 0.0
        assert math.isfinite(mv.t)

    def test_no_exception_on_degenerate(self):
        for n in range(1, 20):
            measure_all(BigramStats(n, n, n, n))


class TestLogLikelihoodRatio:
    def test_independence(self):
        assert log_likelihood_ratio(BigramStats(1, 10, 10, 100)) == pytest.approx(0.0, abs=1e-12)

    def test_derived_value(self):
        got = log_likelihood_ratio(BigramStats(10, 20, 20, 1000))
        assert got == pytest.approx(56.75, abs=0.01)
        assert got == pytest.approx(LLR_10_20_20_1000, abs=1e-9)
        assert got == pytest.approx(oracles.g_squared(10, 20, 20, 1000), abs=1e-9)

    def test_zero_log_zero_guards(self):
        # p1 = 1 and p2 = 0
        got = log_likelihood_ratio(BigramStats(10, 10, 10, 1000))
        assert got == pytest.approx(112.00, abs=0.01)
        assert got == pytest.approx(LLR_10_10_10_1000, abs=1e-9)

    def test_n2_zero(self):
        # c1 == N: every pair starts with w1, so w2 never follows anything else
        assert log_likelihood_ratio(BigramStats(3, 5, 3, 5)) == pytest.approx(0.0, abs=1e-12)

    @given(tables())
    def test_non_negative(self, s):
        assert log_likelihood_ratio(s) >= -1e-9

    @given(tables(max_n=200))
    def test_matches_g_squared(self, s):
        assert log_likelihood_ratio(s) == pytest.approx(
            oracles.g_squared(s.c12, s.c1, s.c2, s.N), abs=1e-9
        )


class TestMeasureAll:
    def test_independence_triple(self):
        mv = measure_all(BigramStats(1, 10, 10, 100))
        assert mv.as_tuple() == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)

    def test_composition(self):
        mv = measure_all(BigramStats(10, 20, 20, 1000))
        assert mv.mi == pytest.approx(4.643856, abs=1e-6)
        assert mv.t == pytest.approx(3.0511, abs=1e-4)
        assert mv.llr == pytest.approx(56.7554, abs=1e-4)

    @pytest.mark.parametrize(
        "counts",
        [(6, 5, 10, 100), (1, 0, 1, 10), (1, 1, 1, 0), (5, 50, 50, 20), (7, 9, 9, 10)],
    )
    def test_invalid(self, counts):
        with pytest.raises(InvalidStats):
            measure_all(BigramStats(*counts))


@given(tables(max_n=2000))
def test_vectorized_matches_scalar(s):
    mi, t, llr, deg = measure_arrays([s.c12], [s.c1], [s.c2], s.N)
    mv = measure_all(s)
    assert mi[0] == pytest.approx(mv.mi, abs=1e-12)
    assert t[0] == pytest.approx(mv.t, abs=1e-12)
    assert llr[0] == pytest.approx(mv.llr, abs=1e-9)
    assert bool(deg[0]) == mv.t_degenerate


@given(st.integers(2, 500), st.integers(1, 500), st.integers(1, 500))
def test_monotone_in_joint_count(n, c1, c2):
    assume(c1 <= n and c2 <= n)
    lo = max(1, c1 + c2 - n)
    hi = min(c1, c2)
    assume(hi > lo)
    prev_mi = prev_llr = None
    for c12 in range(lo, hi + 1):
        s = BigramStats(c12, c1, c2, n)
        m, g = pmi(s), log_likelihood_ratio(s)
        if prev_mi is not None:
            assert m > prev_mi
            if c12 * n >= c1 * c2 and (c12 - 1) * n >= c1 * c2:
                assert g > prev_llr
        prev_mi, prev_llr = m, g


def test_small_enumeration_against_oracles():
    rows = np.array(list(oracles.valid_tables(20)))
    mi, t, llr, _ = measure_arrays(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3])
    for i, (c12, c1, c2, n) in enumerate(rows):
        assert abs(mi[i] - oracles.pmi(c12, c1, c2, n)) <= 1e-9
        ref_t = oracles.t_stat(c12, c1, c2, n)
        assert abs(t[i] - (0.0 if ref_t is None else ref_t)) <= 1e-9
        assert abs(llr[i] - oracles.g_squared(c12, c1, c2, n)) <= 1e-9
