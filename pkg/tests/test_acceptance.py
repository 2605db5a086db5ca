"""Acceptance criteria, one test each, at the stated tolerances and budgets."""

import math
import time

import numpy as np

from netcap import suites
from netcap.bounds import RelationInputs, deep_net_lower_bound, relation_lower_bound
from netcap.capacity import constant_ledger
from netcap.hard_instance import choose_nstar, code_l1_matrix, gv_code


class TestAcceptance:
    def test_1_sign_codes(self, report_line):
        t0 = time.perf_counter()
        rows = []
        ok = True
        for m in (4, 8, 16, 32, 64):
            code = gv_code(m)
            D = code_l1_matrix(code.words)
            min_l1 = D[np.triu_indices(len(code), 1)].min()
            ok &= len(code) >= 2 ** (m / 16) and min_l1 >= m / 2
            rows.append(f"m={m}:{len(code)}/{min_l1}")
        dt = time.perf_counter() - t0
        ok &= dt < 5
        report_line(1, ok, f"sign codes size/min-l1 {' '.join(rows)} ({dt:.2f}s)")
        assert ok

    def test_2_separation(self, report_line):
        t0 = time.perf_counter()
        res = suites.separation()
        dt = time.perf_counter() - t0
        cases = res.details["cases"]
        worst_margin = min(c["min_distance"] / c["bound"] for c in cases)
        worst_tol = max(c["rel_tolerance"] for c in cases)
        worst_cf = max(c["max_closed_form_rel_err"] for c in cases)
        ok = res.passed and dt < 60
        report_line(2, ok, f"{len(cases)} cases, min distance/bound {worst_margin:.3f}, "
                           f"max rel tol {worst_tol:.1e}, closed-form rel err {worst_cf:.1e} ({dt:.1f}s)")
        assert ok, res.witness

    def test_3_class_membership(self, report_line):
        t0 = time.perf_counter()
        res = suites.membership(n_members=8)
        dt = time.perf_counter() - t0
        cases = res.details["cases"]
        worst = max(c["max_ratio"] / c["c0"] for c in cases)
        ok = res.passed and dt < 60
        report_line(3, ok, f"{len(cases)} cases, {sum(c['members'] for c in cases)} members, max ratio/c0 {worst:.3f} "
                           f"(limit 1.05) ({dt:.1f}s)")
        assert ok, res.witness

    def test_4_covering_packing(self, report_line):
        t0 = time.perf_counter()
        res = suites.packing(eps_list=(0.5, 0.25), per_axis=11)
        dt = time.perf_counter() - t0
        reps = res.details["reports"]
        text = ", ".join(f"eps={r['epsilon']}: M(2eps)={r['empirical_packing']} vs 2^{r['log2_tight']:.1f}" for r in reps)
        ok = res.passed and dt < 600
        report_line(4, ok, f"{text}; exact chain held on {res.details['chain_checks']} radii ({dt:.1f}s)")
        assert ok, res.witness

    def test_5_uniform_bound(self, report_line):
        t0 = time.perf_counter()
        res = suites.uniform_bound(draws=1000)
        dt = time.perf_counter() - t0
        rows = res.details["fixtures"]
        viol = sum(r["violations"] for r in rows)
        worst = max(max(r["max_norm_over_bound"]) for r in rows)
        ok = res.passed and viol == 0 and dt < 120
        report_line(5, ok, f"{len(rows)} fixtures x 1000 draws, {viol} violations, max norm/bound {worst:.2e} ({dt:.1f}s)")
        assert ok, res.witness

    def test_6_epsilon_nets(self, report_line):
        t0 = time.perf_counter()
        res = suites.epsilon_net(draws=1000)
        dt = time.perf_counter() - t0
        nets = res.details["nets"]
        text = ", ".join(f"{r['fixture']}@{r['eps']}: size {r['size']} max dist {r['max_distance']:.3f}" for r in nets)
        ok = res.passed and dt < 300
        report_line(6, ok, f"{text} ({dt:.1f}s)")
        assert ok, res.witness

    def test_7_constants(self, report_line):
        t0 = time.perf_counter()
        checks = {}
        led = constant_ledger(1, 1, 1)
        # c1' = 6 c1 c (1 + 2^{d+1}), c2' = 2 c (1 + 2^{d+1}), c3 = 2 max
        checks["c1'"] = (led.c1_prime, 30.0)
        checks["c2'"] = (led.c2_prime, 10.0)
        checks["c3"] = (led.c3, 60.0)
        led2 = constant_ledger(2, 0.5, 2)
        checks["c3(c=2,c1=.5,d=2)"] = (led2.c3, 2 * max(6 * 0.5 * 2 * 9, 2 * 2 * 9))
        # relation constant at d = r = 1, beta = 0, C1 = 1, C2 = 10: (1/4) [128 (log2 114 + 1)]^{-1}
        checks["C'"] = (relation_lower_bound(RelationInputs(1.0, 10.0, 0.0, 2, 1.0, 1)).constant,
                        0.25 / (128 * (math.log2(114) + 1)))
        checks["N*"] = (choose_nstar(4, 1, 1.0, 0.0, 1.0, 10.0), math.ceil(512 * math.log2(118)))
        cert = deep_net_lower_bound(16, 1, 1.0, 2, 1.0, 1, led)
        c1bar = 0.5 / (512 * (math.log2(48 * 60) + 1))
        checks["C1bar'"] = (cert.trail["C1bar_prime"], c1bar)
        checks["C"] = (cert.constant, c1bar / 3)
        rel = {k: abs(a - b) / abs(b) for k, (a, b) in checks.items()}
        dt = time.perf_counter() - t0
        ok = all(v <= 1e-12 for v in rel.values()) and checks["N*"][1] == 3524 and dt < 1
        ok &= abs(cert.constant - 2.61e-5) / 2.61e-5 < 2e-3
        report_line(7, ok, f"max rel err {max(rel.values()):.1e}; c3={led.c3:g}, N*={checks['N*'][0]}, "
                           f"C'={checks['C' + chr(39)][0]:.4e}, C={cert.constant:.4e}")
        assert ok, rel

    def test_8_rates(self, report_line):
        t0 = time.perf_counter()
        res = suites.rates(cases=((1, 1), (2, 2), (1, 4)))
        dt = time.perf_counter() - t0
        fits = res.details["fits"]
        ok = res.passed and dt < 5
        report_line(8, ok, ", ".join(f"(r,d)=({f['r']:g},{f['d']}): slope {f['slope']:.5f} vs {f['expected']:.3f}"
                                     for f in fits) + f" ({dt:.2f}s)")
        assert ok

    def test_9_localized(self, report_line):
        t0 = time.perf_counter()
        res = suites.localized(dims=(1, 2), sharpness=1e3, margin=0.05)
        dt = time.perf_counter() - t0
        ok = res.passed and dt < 10
        report_line(9, ok, ", ".join(f"d={c['d']}: max err {c['max_error']:.1e} on {c['points']} points"
                                     for c in res.details["cases"]) + f" ({dt:.2f}s)")
        assert ok, res.witness
