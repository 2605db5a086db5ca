import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcap.bounds import (
    RelationInputs,
    chain_ratio_floor,
    deep_net_lower_bound,
    fit_loglog_slope,
    fit_polylog,
    gap_report,
    rate_curve,
    recompute,
    relation_inputs_for_deep_net,
    relation_lower_bound,
)
from netcap.capacity import constant_ledger


class TestRelation:
    def test_constant(self):
        cert = relation_lower_bound(RelationInputs(1, 10, 0, 2, 1, 1))
        assert cert.constant == pytest.approx(0.25 / (128 * (math.log2(114) + 1)), rel=1e-12)
        assert cert.value == pytest.approx(cert.constant * (2 * math.log2(3)) ** -1, rel=1e-12)

    def test_reproducible(self):
        cert = relation_lower_bound(RelationInputs(2, 3, 0.5, 100, 1.5, 2))
        assert recompute(cert).value == cert.value
        assert cert.exact_inputs["beta"] == "1/2"

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            RelationInputs(1, 1, -1, 10, 1, 1)


class TestDeepNet:
    def test_hand_value(self):
        cert = deep_net_lower_bound(16, 1, 1, 2, 1, 1, constant_ledger(1, 1, 1))
        c1bar = 0.5 / (512 * (math.log2(2880) + 1))
        assert cert.constant == pytest.approx(c1bar / 3, rel=1e-12)
        assert cert.constant == pytest.approx(2.61e-5, rel=2e-3)
        assert recompute(cert).value == cert.value

    def test_domain(self):
        led = constant_ledger(1, 1, 1)
        with pytest.raises(ValueError):
            deep_net_lower_bound(1, 1, 1, 2, 1, 1, led)
        with pytest.raises(ValueError):
            deep_net_lower_bound(8, 1, 1, 1, 1, 1, led)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 10**6), st.integers(1, 3), st.integers(2, 4), st.floats(0.5, 3), st.integers(1, 3))
    def test_relation_route_consistent(self, n, L, D_max, r, d):
        # the relation bound applied to the deep-net covering condition stays
        # above the simplified closed form up to the constant lost in simplification
        led = constant_ledger(1, 1, d)
        direct = deep_net_lower_bound(n, L, 1.0, D_max, r, d, led).value
        via = relation_lower_bound(relation_inputs_for_deep_net(n, L, 1.0, D_max, r, d, led)).value
        assert via >= chain_ratio_floor(L, 1.0, D_max, r, d, led) * direct

    def test_ratio_stable_in_n(self):
        led = constant_ledger(1, 1, 2)
        ratios = []
        for n in (2**8, 2**12, 2**16, 2**20):
            direct = deep_net_lower_bound(n, 2, 1.0, 2, 1.0, 2, led).value
            via = relation_lower_bound(relation_inputs_for_deep_net(n, 2, 1.0, 2, 1.0, 2, led)).value
            ratios.append(via / direct)
        assert max(ratios) / min(ratios) < 1.1


class TestCurves:
    def test_unknown_id(self):
        with pytest.raises(ValueError):
            rate_curve("nope", 1, 1)

    def test_slopes(self):
        n = 2.0 ** np.arange(10, 21)
        assert fit_loglog_slope(n, rate_curve("shallow-upper", 2, 4)(n)) == pytest.approx(-0.5)
        cov = rate_curve("vc-covering", 1, 1, {"L": 3, "eps": 0.25})
        assert cov(np.array([10.0]))[0] == pytest.approx(9 * 10 * 2)

    def test_gap_table(self):
        led = constant_ledger(1, 1, 1)
        ns = [2**k for k in range(4, 21)]
        t = gap_report(1, 1, 2, ns, led)
        assert t.curves["shallow-upper"][0] == 1.0
        assert t.curves["relu-deep-upper"][0] == 1.0
        assert len(list(t.rows())) == len(ns) * 3
        a, b = fit_polylog(ns[2:], t.ratio[2:])
        assert b == pytest.approx(1.0, abs=0.05)

    def test_single_n(self):
        t = gap_report(1, 1, 1, [64], constant_ledger(1, 1, 1))
        assert t.n == [64] and len(list(t.rows())) == 3
