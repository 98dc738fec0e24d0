import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from randcompare import erfc, normal_cdf, regularized_incomplete_beta, student_t_cdf

from _oracles import NORMAL_CDF_PROBES, STUDENT_T_CDF_PROBES


class TestNormalCdf:
    @pytest.mark.parametrize("x,expected", NORMAL_CDF_PROBES)
    def test_probes(self, x, expected):
        assert abs(normal_cdf(x) - expected) <= 1e-10

    def test_symmetry_grid(self):
        for x in np.linspace(-10, 10, 201):
            assert normal_cdf(x) + normal_cdf(-x) == pytest.approx(1.0, abs=1e-14)

    def test_monotone_grid(self):
        grid = np.linspace(-12, 12, 481)
        vals = [normal_cdf(x) for x in grid]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    @given(st.floats(-30, 30))
    def test_range(self, x):
        assert 0.0 <= normal_cdf(x) <= 1.0


class TestErfc:
    def test_at_zero(self):
        assert erfc(0.0) == pytest.approx(1.0, abs=1e-15)

    def test_reflection(self):
        for x in np.linspace(-6, 6, 121):
            assert erfc(x) + erfc(-x) == pytest.approx(2.0, abs=1e-13)

    def test_against_math_erfc(self):
        # stdlib math.erfc is an independent implementation
        for x in np.linspace(-8, 8, 161):
            assert erfc(x) == pytest.approx(math.erfc(x), rel=1e-12, abs=1e-300)


class TestStudentTCdf:
    @pytest.mark.parametrize("x,df,expected", STUDENT_T_CDF_PROBES)
    def test_probes(self, x, df, expected):
        assert abs(student_t_cdf(x, df) - expected) <= 1e-8

    def test_center(self):
        for df in (0.5, 1.0, 2.0, 7.3, 100.0):
            assert student_t_cdf(0.0, df) == pytest.approx(0.5, abs=1e-14)

    def test_symmetry(self):
        for df in (1.0, 3.7, 25.0):
            for x in np.linspace(-8, 8, 49):
                total = student_t_cdf(x, df) + student_t_cdf(-x, df)
                assert total == pytest.approx(1.0, abs=1e-12)

    def test_df_one_is_cauchy(self):
        for x in np.linspace(-10, 10, 41):
            cauchy = 0.5 + math.atan(x) / math.pi
            assert student_t_cdf(x, 1.0) == pytest.approx(cauchy, abs=1e-12)

    def test_df_two_closed_form(self):
        for x in np.linspace(-10, 10, 41):
            closed = 0.5 + x / (2.0 * math.sqrt(2.0 + x * x))
            assert student_t_cdf(x, 2.0) == pytest.approx(closed, abs=1e-12)

    def test_large_df_approaches_normal(self):
        for x in np.linspace(-4, 4, 17):
            assert student_t_cdf(x, 1e6) == pytest.approx(normal_cdf(x), abs=2e-6)

    def test_monotone_in_x(self):
        grid = np.linspace(-15, 15, 121)
        vals = [student_t_cdf(x, 4.5) for x in grid]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


class TestIncompleteBeta:
    def test_endpoints(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_uniform_case(self):
        for x in np.linspace(0, 1, 21):
            assert regularized_incomplete_beta(1.0, 1.0, x) == pytest.approx(
                x, abs=1e-13
            )

    def test_reflection(self):
        for a, b in ((0.5, 4.0), (2.0, 2.0), (7.5, 1.25)):
            for x in np.linspace(0.01, 0.99, 25):
                lhs = regularized_incomplete_beta(a, b, x)
                rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x)
                assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_binomial_tail_identity(self):
        # I_p(k, n-k+1) = P(Bin(n, p) >= k), checked by direct summation
        n, k, p = 12, 5, 0.37
        tail = sum(
            math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(k, n + 1)
        )
        assert regularized_incomplete_beta(k, n - k + 1, p) == pytest.approx(
            tail, abs=1e-12
        )


@pytest.mark.parametrize("x,df,expected", STUDENT_T_CDF_PROBES[:4])
def test_live_arbitrary_precision_spotcheck(x, df, expected):
    """The frozen probes themselves, re-derived by mpmath when available."""
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    xm, dfm = mp.mpf(x), mp.mpf(df)
    live = mp.betainc(dfm / 2, dfm / 2, 0, (xm + mp.sqrt(xm**2 + dfm)) / (2 * mp.sqrt(xm**2 + dfm)), regularized=True)
    assert abs(float(live) - expected) <= 1e-13
