import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcap.activations import (
    certify_activation,
    custom_table,
    get_activation,
    gompertz,
    logistic,
)

BUILTIN = ["logistic", "tanh-sigmoid", "arctan-sigmoid", "gompertz", "relu", "gaussian"]


class TestConstants:
    def test_logistic(self):
        act = logistic()
        assert act.lipschitz_c1 == 0.25
        assert act.growth_c == 1.0
        assert act(0.0) == pytest.approx(0.5)

    def test_gompertz_c1(self):
        assert gompertz(1.0, 1.0).lipschitz_c1 == 1.0
        assert gompertz(1.0, 5.0).lipschitz_c1 == pytest.approx(5 / math.e)

    @pytest.mark.parametrize("name", BUILTIN)
    def test_certified(self, name):
        chk = certify_activation(get_activation(name))
        assert chk.passed, chk

    def test_wrong_constant_is_caught(self):
        act = logistic()
        bad = type(act)(act.name, act.rule, 0.2, 1.0, _fn=act._fn)
        assert not certify_activation(bad).lipschitz_ok


class TestCustomTable:
    def test_constants_from_table(self):
        act = custom_table([-1, 0, 1], [0, 0.5, 1])
        assert act.lipschitz_c1 == pytest.approx(0.5)
        assert act(5.0) == 1.0
        assert certify_activation(act).passed

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            custom_table([0, -1], [0, 1])

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=6))
    def test_random_tables_certify(self, values):
        knots = np.linspace(-2, 2, len(values))
        assert certify_activation(custom_table(knots, values), n_pairs=2000).passed


class TestLookup:
    def test_json_roundtrip(self):
        act = gompertz(2.0, 3.0)
        again = get_activation(act.to_json())
        assert again.params == act.params
        assert again.lipschitz_c1 == act.lipschitz_c1

    def test_unknown(self):
        with pytest.raises(ValueError):
            get_activation("softplus")

    def test_sigmoidal_flags(self):
        assert get_activation("logistic").is_sigmoidal
        assert not get_activation("relu").is_sigmoidal
