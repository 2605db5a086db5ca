import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcap.numerics import (
    FunctionHandle,
    QuadratureGrid,
    SizeError,
    covering_from_matrix,
    default_grid,
    distance_matrix,
    exact_covering_number,
    exact_packing_number,
    greedy_covering,
    greedy_packing,
    holder_check,
    l1_distance,
    l1_norm,
    packing_from_matrix,
    split_smoothness,
)


def _const(c, dim=1):
    return FunctionHandle(lambda X: np.full(len(X), float(c)), dim)


def _brute_packing(D, eps):
    k = len(D)
    for size in range(k, 0, -1):
        for sub in itertools.combinations(range(k), size):
            if all(D[i, j] >= eps for i, j in itertools.combinations(sub, 2)):
                return size
    return 0


def _brute_covering(D, eps):
    k = len(D)
    for size in range(1, k + 1):
        for sub in itertools.combinations(range(k), size):
            if np.all((D[list(sub)] <= eps).any(axis=0)):
                return size
    return k


class TestQuadrature:
    def test_polynomial_exact(self):
        g = QuadratureGrid(2, 8)
        vals = g.nodes[:, 0] ** 4 * g.nodes[:, 1] ** 2
        assert g.integrate(vals) == pytest.approx(4 / 15, rel=1e-13)

    def test_breakpoints_make_kinks_exact(self):
        g = QuadratureGrid(1, 4, breakpoints=(0.3,))
        est = l1_norm(lambda X: X[:, 0] - 0.3, g)
        assert est.value == pytest.approx((1.3**2 + 0.7**2) / 2, rel=1e-13)
        assert est.tol < 1e-13

    def test_midpoint(self):
        g = QuadratureGrid(1, 100, "midpoint")
        assert g.integrate(np.ones(len(g))) == pytest.approx(2.0)

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("NETCAP_QUAD_NODES", "12")
        assert default_grid(1).nodes_per_axis == 12

    def test_dimension_mismatch(self, grid1):
        with pytest.raises(ValueError):
            l1_norm(FunctionHandle(lambda X: X[:, 0], 2), grid1)


class TestDistances:
    def test_constants(self, grid1):
        est = l1_distance(_const(1.0), _const(0.25), grid1)
        assert est.value == pytest.approx(1.5)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
    def test_metric_axioms(self, p, q):
        g = QuadratureGrid(1, 16)
        f = lambda X: p[0] + p[1] * X[:, 0] + p[2] * X[:, 0] ** 2
        h = lambda X: q[0] * np.sin(q[1] * X[:, 0]) + q[2]
        z = lambda X: np.zeros(len(X))
        dfh = l1_distance(f, h, g).value
        assert dfh == l1_distance(h, f, g).value
        assert dfh >= 0
        assert l1_distance(f, f, g).value == 0
        assert dfh <= l1_distance(f, z, g).value + l1_distance(z, h, g).value + 1e-12

    def test_matrix_symmetric_with_tolerances(self, grid1):
        fs = [_const(c) for c in (0, 0.5, 2)]
        D, T = distance_matrix(fs, grid1)
        np.testing.assert_allclose(D, [[0, 1, 4], [1, 0, 3], [4, 3, 0]])
        assert np.all(T < 1e-12)


class TestPackingCovering:
    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=8), st.floats(0.05, 3))
    def test_exact_matches_brute_force(self, pts, eps):
        D = np.abs(np.subtract.outer(pts, pts))
        assert len(packing_from_matrix(D, eps)) == _brute_packing(D, eps)
        assert len(covering_from_matrix(D, eps)) == _brute_covering(D, eps)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=8), st.floats(0.05, 3))
    def test_chain(self, pts, eps):
        D = np.abs(np.subtract.outer(pts, pts))
        m2 = len(packing_from_matrix(D, 2 * eps + 1e-9))
        assert m2 <= len(covering_from_matrix(D, eps)) <= len(packing_from_matrix(D, eps))

    def test_greedy_is_maximal(self, grid1):
        fs = [_const(c) for c in np.linspace(0, 1, 11)]
        kept = greedy_packing(fs, 0.5, grid1)
        D, _ = distance_matrix(fs, grid1, with_tolerance=False)
        assert all(D[i, j] >= 0.5 for i, j in itertools.combinations(kept, 2))
        others = set(range(11)) - set(kept)
        assert all(min(D[o, k] for k in kept) < 0.5 for o in others)

    def test_greedy_covering_covers(self, grid1):
        fs = [_const(c) for c in np.linspace(0, 1, 11)]
        chosen = greedy_covering(fs, 0.25, grid1)
        D, _ = distance_matrix(fs, grid1, with_tolerance=False)
        assert np.all((D[chosen] <= 0.25).any(axis=0))
        assert len(chosen) >= exact_covering_number(fs, 0.25, grid1)

    def test_exact_exact_values(self, grid1):
        fs = [_const(c) for c in (0, 0.25, 0.5, 0.75, 1.0)]
        # distances are 2 |c - c'|
        assert exact_packing_number(fs, 1.0, grid1) == 3
        assert exact_covering_number(fs, 0.5, grid1) == 2

    def test_size_limit(self, grid1):
        with pytest.raises(SizeError):
            exact_packing_number([_const(c) for c in range(30)], 1.0, grid1)


class TestHolder:
    def test_split(self):
        assert split_smoothness(1.0) == (0, 1.0)
        assert split_smoothness(2.5) == (2, 0.5)
        assert split_smoothness(0.3) == (0, 0.3)

    def test_lipschitz_passes_and_fails(self):
        f = FunctionHandle(lambda X: np.sin(2 * X[:, 0]), 1)
        assert holder_check(f, 1.0, 2.0).passed
        assert not holder_check(f, 1.0, 1.5).passed

    def test_second_order(self):
        # f = x^3, f'' = 6x is 6-Lipschitz
        f = FunctionHandle(lambda X: X[:, 0] ** 3, 1)
        rep = holder_check(f, 2.0, 6.0)
        assert rep.passed
        assert rep.max_ratio == pytest.approx(6.0, rel=1e-3)

    def test_fractional(self):
        f = FunctionHandle(lambda X: np.sqrt(np.abs(X[:, 0])), 1)
        assert holder_check(f, 0.5, 1.0).passed
        assert not holder_check(f, 0.5, 0.5, slack=0.0).passed

    def test_step_guard(self):
        with pytest.raises(ValueError):
            holder_check(FunctionHandle(lambda X: X[:, 0], 1), 2.0, 1.0, fd_step=0.1)
