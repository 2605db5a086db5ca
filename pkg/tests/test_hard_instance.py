import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcap.hard_instance import (
    BumpInfeasible,
    GridPartition,
    build_family,
    choose_nstar,
    code_l1_matrix,
    family_from_manifest,
    gv_code,
    make_bump,
    min_admissible_c0,
    separation_bound,
    smoothstep,
    verify_class_membership,
    verify_localization,
    verify_separation,
)
from netcap.numerics import QuadratureGrid, SizeError, l1_norm


class TestCodes:
    def test_lexicographic_start(self):
        code = gv_code(4)
        assert code.words[0].tolist() == [-1, -1, -1, -1]
        assert code.mode == "lexicographic"

    @pytest.mark.parametrize("m", [1, 2, 5, 12])
    def test_distance(self, m):
        code = gv_code(m)
        D = code_l1_matrix(code.words)
        if len(code) > 1:
            assert D[np.triu_indices(len(code), 1)].min() >= m / 2
        assert code.complete

    def test_random_mode_is_seeded(self):
        a, b, c = gv_code(40, seed=3), gv_code(40, seed=3), gv_code(40, seed=4)
        assert np.array_equal(a.words, b.words)
        assert not np.array_equal(a.words, c.words)

    def test_partial_flagged(self):
        code = gv_code(400, max_words=8)
        assert len(code) == 8 and not code.complete

    def test_too_large(self):
        with pytest.raises(SizeError):
            gv_code(400)


class TestBump:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_smoothstep(self, k):
        S = smoothstep(k)
        assert S(0) == pytest.approx(0) and S(1) == pytest.approx(1)
        for j in range(1, k + 1):
            assert S.deriv(j)(0) == pytest.approx(0, abs=1e-12)
            assert S.deriv(j)(1) == pytest.approx(0, abs=1e-12)

    def test_plateau_and_support(self):
        b = make_bump(2, 1.0, 8.0)
        h = 0.5 / math.sqrt(2)
        assert b(np.array([[h * 0.99, -h * 0.99]]))[0] == 1.0
        assert b(np.array([[1 / math.sqrt(2) + 1e-9, 0.0]]))[0] == 0.0

    @pytest.mark.parametrize("d,r", [(1, 0.5), (1, 2.0), (2, 1.0)])
    def test_l1_norm_exact(self, d, r):
        b = make_bump(d, r, 100.0)
        g = QuadratureGrid(d, 8, breakpoints=tuple(np.array([-1, -0.5, 0.5, 1]) / math.sqrt(d)))
        assert l1_norm(b, g).value == pytest.approx(b.l1_norm(), rel=1e-12)

    def test_infeasible_reports_min(self):
        with pytest.raises(BumpInfeasible) as exc:
            make_bump(1, 2.0, 8.0)
        assert exc.value.min_c0 == pytest.approx(min_admissible_c0(1, 2.0))
        make_bump(1, 2.0, exc.value.min_c0 * 1.0000001)

    def test_min_c0_values(self):
        assert min_admissible_c0(1, 1.0) == pytest.approx(3.0)
        assert min_admissible_c0(2, 1.0) == pytest.approx(6.0)


class TestPartition:
    @settings(max_examples=30)
    @given(st.integers(1, 3), st.integers(1, 5))
    def test_cells_tile(self, d, N):
        part = GridPartition(d, N)
        assert part.n_cells == N**d
        X = np.random.default_rng(0).uniform(-1, 1, (200, d))
        k = part.cell_of(X)
        assert np.all(np.abs(X - part.centers[k]) <= part.side / 2 + 1e-12)


class TestFamily:
    def test_localization(self, rng):
        fam = build_family(3, make_bump(2, 1.0, 8.0))
        assert verify_localization(fam, rng.uniform(-1, 1, (3000, 2))).passed

    def test_single_cell(self):
        fam = build_family(1, make_bump(1, 1.0, 8.0))
        assert len(fam.code) == 2
        res = verify_separation(fam)
        assert not res.violation

    def test_separation_and_closed_form(self):
        fam = build_family(2, make_bump(1, 1.0, 8.0))
        res = verify_separation(fam)
        assert res.min_distance >= separation_bound(1, 1.0, 2) - res.max_tolerance
        assert res.max_closed_form_rel_err < 1e-12
        # d = 1, N = 2: one differing sign costs 2 N^{-r-1} ||g||_1
        assert fam.closed_form_distance(0, 1) == pytest.approx(
            2 * 2 ** (-2) * fam.bump.l1_norm() * np.abs(fam.code.words[0] - fam.code.words[1]).sum() / 2
        )

    def test_membership(self):
        fam = build_family(2, make_bump(2, 0.5, 8.0))
        worst, reps = verify_class_membership(fam, n_members=2, n_pairs=1000)
        assert worst.passed

    def test_too_rough_member_fails(self):
        # the same family checked against a smaller class constant must fail
        fam = build_family(2, make_bump(1, 1.0, 8.0))
        fam_tight = build_family(2, make_bump(1, 1.0, 3.0))
        worst, _ = verify_class_membership(fam, n_members=2, n_pairs=2000)
        assert worst.max_ratio > 2.5
        assert verify_class_membership(fam_tight, n_members=2, n_pairs=2000)[0].passed

    def test_manifest_roundtrip(self):
        fam = build_family(2, make_bump(2, 1.0, 8.0))
        again = family_from_manifest(fam.manifest())
        X = np.random.default_rng(1).uniform(-1, 1, (100, 2))
        np.testing.assert_array_equal(again.member(3)(X), fam.member(3)(X))


class TestNstar:
    def test_example(self):
        assert choose_nstar(4, 1, 1, 0, 1, 10) == 3524

    @settings(max_examples=50)
    @given(st.integers(1, 1000), st.integers(1, 4), st.floats(0.5, 3))
    def test_minimal(self, n, d, r):
        q = 1 + 3 * r / d
        target = math.ceil(32 * q * n * math.log2(2 + 8 * d ** (d / 2) * (q + 1) + n))
        N = choose_nstar(n, d, r)
        assert N**d >= target
        assert N == 1 or (N - 1) ** d < target
