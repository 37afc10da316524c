import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rankmaxsum.combine import (
    cauchy_combine,
    cauchy_critical_value,
    clamp_component,
    combine_reports,
    minp_combine,
    test_rc1,
    test_rc2,
)
from rankmaxsum.model import Calibration, Dataset, DomainError, Method, TestReport

open_unit = st.floats(1e-9, 1 - 1e-9)


class TestCauchy:
    def test_symmetric(self):
        r = cauchy_combine([0.5, 0.5])
        assert r.t_combined == pytest.approx(0.0, abs=1e-15)
        assert r.p_combined == pytest.approx(0.5, abs=1e-15)

    @given(open_unit)
    def test_idempotent(self, q):
        assert cauchy_combine([q, q]).p_combined == pytest.approx(q, abs=1e-12)

    def test_worked_example(self):
        # direct evaluation of both formulas with the math module
        t = 0.5 * math.tan(0.45 * math.pi) + 0.5 * math.tan(0.0)
        r = cauchy_combine([0.05, 0.5])
        assert r.t_combined == pytest.approx(t, rel=1e-12)
        assert r.t_combined == pytest.approx(3.1568758, abs=1e-7)
        assert r.p_combined == pytest.approx(0.5 - math.atan(t) / math.pi, abs=1e-12)
        assert r.p_combined == pytest.approx(0.0976, abs=5e-4)

    @given(st.lists(open_unit, min_size=1, max_size=4))
    def test_backtransform(self, ps):
        r = cauchy_combine(ps)
        assert r.p_combined == pytest.approx(0.5 - math.atan(r.t_combined) / math.pi, abs=1e-12)
        assert sum(w for _, _, w in r.components) == pytest.approx(1.0)

    @given(open_unit, open_unit, st.sampled_from([0.01, 0.05, 0.1]))
    def test_rejection_rule_equivalence(self, p1, p2, alpha):
        r = cauchy_combine([p1, p2])
        if abs(r.t_combined - cauchy_critical_value(alpha)) > 1e-9 * max(1.0, abs(r.t_combined)):
            assert (r.p_combined < alpha) == (r.t_combined > cauchy_critical_value(alpha))

    @given(open_unit, open_unit, st.floats(0.01, 0.99))
    def test_monotone(self, p1, p2, frac):
        smaller = p1 * frac
        if smaller > 0 and p1 - smaller > 1e-6 * p1:
            assert cauchy_combine([smaller, p2]).p_combined <= cauchy_combine([p1, p2]).p_combined

    def test_domain(self):
        for bad in ([0.0, 0.5], [1.0, 0.5], [np.nan, 0.5]):
            with pytest.raises(DomainError):
                cauchy_combine(bad)
        with pytest.raises(DomainError):
            cauchy_combine([0.2, 0.3], weights=[1.0, -1.0])

    def test_weights_normalized(self):
        r = cauchy_combine([0.2, 0.3], weights=[2.0, 6.0])
        assert [w for _, _, w in r.components] == [0.25, 0.75]


class TestMinP:
    def test_example(self):
        assert minp_combine(0.5, 0.9).p_combined == pytest.approx(0.75)

    def test_boundaries(self):
        assert minp_combine(0.0, 0.7).p_combined == 0.0
        assert minp_combine(1.0, 1.0).p_combined == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            minp_combine(-0.1, 0.5)


class TestRC:
    def test_both_half(self):
        rs = TestReport(Method.RS, 0.0, 0.5, Calibration.NORMAL)
        rm = TestReport(Method.RM1, 1.0, 0.5, Calibration.MULTIPLIER, {"B": 2000})
        assert combine_reports(Method.RC1, rs, rm).pvalue == pytest.approx(0.5, abs=1e-15)

    def test_clamping(self):
        rm = TestReport(Method.RM1, 50.0, 1 / 2001, Calibration.MULTIPLIER, {"B": 2000})
        assert clamp_component(rm) == 1 / 2001
        top = TestReport(Method.RM1, 0.0, 1.0, Calibration.MULTIPLIER, {"B": 2000})
        assert clamp_component(top) == 1 - 1 / 20000
        rs = TestReport(Method.RS, 50.0, 0.0, Calibration.NORMAL)
        assert 0 < clamp_component(rs) < 1e-200

    def test_extreme_component_dominates(self):
        rs = TestReport(Method.RS, 50.0, 0.0, Calibration.NORMAL)
        rm = TestReport(Method.RM1, 0.0, 1.0, Calibration.MULTIPLIER, {"B": 2000})
        assert combine_reports(Method.RC1, rs, rm).pvalue < 1e-100

    def test_end_to_end(self, rng):
        ds = Dataset(X=rng.standard_normal((40, 30)), y=rng.standard_normal(40))
        r1 = test_rc1(ds, B=300, rng=0)
        r2 = test_rc2(ds, B=300, rng=0)
        assert r1.calibration is Calibration.CAUCHY and r2.method is Method.RC2
        assert r1.aux["p_RS"] == r2.aux["p_RS"]
