"""Verification suites run by ``netcap verify`` and the acceptance tests.

Each suite returns a :class:`SuiteResult` with a pass flag, the numbers
behind it and, on failure, a witness.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bd
from .capacity import (
    constant_ledger,
    enumerate_epsilon_net,
    network_covering_bound,
    packing_vs_bound_report,
    parameter_grid,
)
from .fixtures import chain, fixture_set, small_fixtures
from .hard_instance import (
    build_family,
    choose_nstar,
    code_l1_matrix,
    gv_code,
    make_bump,
    min_admissible_c0,
    verify_class_membership,
    verify_separation,
)
from .network import Architecture, _forward, forward_batch, localized_net, uniform_output_bound
from .numerics import covering_from_matrix, default_grid, packing_from_matrix

__all__ = ["SuiteResult", "SUITES", "run_suites", "class_constant"]


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    witness: object = None
    seconds: float = 0.0

    def to_json(self, timing: bool = False):
        out = {"name": self.name, "passed": self.passed, "details": self.details, "witness": self.witness}
        if timing:
            out["seconds"] = self.seconds
        return out


def class_constant(d: int, r: float) -> float:
    """A class constant ``c0`` that the bump profile certifies at ``(d, r)``."""
    return float(max(8.0, math.ceil(min_admissible_c0(d, r))))


LATTICE = list(itertools.product((1, 2), (0.5, 1.0, 2.0), (2, 4)))


def codes(ms=(4, 8, 16, 32, 64), seed: int = 0) -> SuiteResult:
    rows, ok, witness = [], True, None
    for m in ms:
        code = gv_code(m, seed=seed)
        D = code_l1_matrix(code.words)
        off = D[np.triu_indices(len(code), 1)]
        min_l1 = int(off.min()) if off.size else None
        good = len(code) >= 2 ** (m / 16) and (min_l1 is None or min_l1 >= m / 2)
        rows.append({"m": m, "size": len(code), "required": 2 ** (m / 16), "min_l1": min_l1, "mode": code.mode})
        if not good and ok:
            ok, witness = False, {"m": m}
        ok = ok and good
    return SuiteResult("codes", ok, {"codes": rows}, witness)


def separation(lattice=LATTICE, seed: int = 0, pair_budget: int = 200) -> SuiteResult:
    rows, ok, witness = [], True, None
    for d, r, N in lattice:
        fam = build_family(N, make_bump(d, r, class_constant(d, r)), seed=seed)
        res = verify_separation(fam, pair_budget)
        rel_tol = res.max_tolerance / res.bound
        good = not res.violation and rel_tol < 1e-3 and res.max_closed_form_rel_err < 1e-3
        rows.append({"d": d, "r": r, "n_star": N, "rel_tolerance": rel_tol, **res.to_json()})
        if not good and ok:
            witness = rows[-1]
        ok = ok and good
    return SuiteResult("separation", ok, {"cases": rows}, witness)


def membership(lattice=LATTICE, seed: int = 0, n_members: int = 4, n_pairs: int = 4000) -> SuiteResult:
    rows, ok, witness = [], True, None
    for d, r, N in lattice:
        c0 = class_constant(d, r)
        fam = build_family(N, make_bump(d, r, c0), seed=seed)
        worst, reps = verify_class_membership(fam, n_members, n_pairs, seed=seed)
        rows.append({"d": d, "r": r, "n_star": N, "c0": c0, "members": len(reps), "max_ratio": worst.max_ratio,
                     "limit": c0 * (1 + worst.slack)})
        if not worst.passed and ok:
            witness = worst.to_json()
        ok = ok and worst.passed
    return SuiteResult("membership", ok, {"cases": rows}, witness)


def packing(arch: Architecture | None = None, eps_list=(0.5, 0.25), per_axis: int = 11, n_sets: int = 20,
            seed: int = 0) -> SuiteResult:
    """Greedy packing at 2 eps against the tight bound, plus the exact
    chain ``M(2 eps) <= N(eps) <= M(eps)`` on random 10-element sets."""
    arch = arch or chain(5)
    grid = default_grid(arch.input_dim)
    thetas = parameter_grid(arch, per_axis)
    reports = [packing_vs_bound_report(arch, e, thetas, grid, seed) for e in eps_list]
    ok = not any(rep.violation for rep in reports)
    rng = np.random.default_rng(seed)
    chains, witness = [], None
    for _ in range(n_sets):
        vals = forward_batch(arch, rng.uniform(-arch.radius, arch.radius, (10, arch.n_params)), grid.nodes)
        D = np.abs(vals[:, None, :] - vals[None, :, :]) @ grid.weights
        dist = np.unique(D[np.triu_indices(10, 1)])
        # radii strictly between distinct distances and half-distances avoid ties
        cuts = np.unique(np.concatenate([dist, dist / 2]))
        for eps in (cuts[:-1] + cuts[1:]) / 2:
            m2 = len(packing_from_matrix(D, 2 * eps))
            nc = len(covering_from_matrix(D, eps))
            m1 = len(packing_from_matrix(D, eps))
            chains.append((m2, nc, m1))
            if not (m2 <= nc <= m1) and witness is None:
                witness = {"eps": float(eps), "M(2eps)": m2, "N(eps)": nc, "M(eps)": m1}
    ok = ok and witness is None
    details = {"reports": [rep.to_json() for rep in reports], "chain_checks": len(chains)}
    return SuiteResult("packing", ok, details, witness)


def uniform_bound(archs: dict | None = None, draws: int = 1000, seed: int = 0, batch: int = 100) -> SuiteResult:
    """``max_i ||h_l^i||_1 <= (c (1 + 2^{d+1}) R)^l d_{l-1} ... d_0`` for random draws."""
    archs = archs or fixture_set()
    rng = np.random.default_rng(seed)
    rows, ok, witness = [], True, None
    for name, arch in archs.items():
        grid = default_grid(arch.input_dim)
        fine = grid.refined()
        worst = np.zeros(arch.depth)
        violations = 0
        for start in range(0, draws, batch):
            th = rng.uniform(-arch.radius, arch.radius, (min(batch, draws - start), arch.n_params))
            _, hid = _forward(arch, th, grid.nodes, keep_layers=True)
            _, hid_f = _forward(arch, th, fine.nodes, keep_layers=True)
            for ell, (h, hf) in enumerate(zip(hid, hid_f), start=1):
                n1 = np.einsum("pmi,m->pi", np.abs(h), grid.weights)
                tol = np.abs(n1 - np.einsum("pmi,m->pi", np.abs(hf), fine.weights))
                bound = uniform_output_bound(arch, ell)
                bad = n1 - tol > bound
                violations += int(bad.sum())
                worst[ell - 1] = max(worst[ell - 1], float((n1 / bound).max()))
                if bad.any() and witness is None:
                    p = int(np.argwhere(bad)[0][0])
                    witness = {"fixture": name, "layer": ell, "params": th[p].tolist()}
        rows.append({"fixture": name, "draws": draws, "violations": violations, "max_norm_over_bound": worst.tolist()})
        ok = ok and violations == 0
    return SuiteResult("uniform-bound", ok, {"fixtures": rows}, witness)


NET_EPS = {"chain3": (0.5, 0.25), "plane": (0.5,), "shared-pair": (0.5,)}


def epsilon_net(archs: dict | None = None, draws: int = 1000, seed: int = 0) -> SuiteResult:
    archs = archs or small_fixtures()
    rows, ok, witness = [], True, None
    for name, arch in archs.items():
        for eps in NET_EPS.get(name, (0.5,)):
            net = enumerate_epsilon_net(arch, eps)
            worst, tol, dists, tols = net.validate(draws, seed=seed)
            log2_bound = network_covering_bound(arch, eps).log2_tight
            good = bool(np.all(dists <= eps + tols)) and math.log2(net.size) <= log2_bound
            rows.append({"fixture": name, "eps": eps, "size": net.size, "certified_radius": net.radius,
                         "max_distance": worst, "tolerance": tol, "log2_tight": log2_bound})
            if not good and ok:
                witness = rows[-1]
            ok = ok and good
    return SuiteResult("epsilon-net", ok, {"nets": rows}, witness)


def constants() -> SuiteResult:
    """Library constants against direct evaluation of their formulas."""
    checks = {}
    led = constant_ledger(1, 1, 1)
    checks["c3"] = (led.c3, 60.0)
    checks["c1_prime"] = (led.c1_prime, 6 * 1 * 1 * (1 + 2**2))
    c_rel = bd.relation_lower_bound(bd.RelationInputs(1, 10, 0, 2, 1, 1)).constant
    checks["C_prime"] = (c_rel, 0.25 / (128 * (math.log2(2 + 8 * 14) + 1)))
    checks["n_star"] = (choose_nstar(4, 1, 1, 0, 1, 10), 3524)
    cert = bd.deep_net_lower_bound(16, 1, 1, 2, 1, 1, led)
    c1bar = 0.5 / (512 * (math.log2(2880) + 1))
    checks["C1bar_prime"] = (cert.trail["C1bar_prime"], c1bar)
    checks["C"] = (cert.constant, c1bar / 3)
    rel = {k: abs(a - b) / abs(b) for k, (a, b) in checks.items()}
    ok = all(v <= 1e-12 for v in rel.values())
    bad = [k for k, v in rel.items() if v > 1e-12]
    return SuiteResult("constants", ok, {k: {"value": a, "reference": b, "rel_err": rel[k]} for k, (a, b) in checks.items()},
                       bad or None)


def rates(cases=((1, 1), (2, 2), (1, 4)), L: int = 2, R: float = 1.0, D_max: int = 2) -> SuiteResult:
    """Log-log slope of the deep-net lower bound with ``(log2 n)^{-r/d}`` divided out."""
    n = 2.0 ** np.arange(10, 21)
    led = constant_ledger(1, 1, 1)
    rows, ok = [], True
    for r, d in cases:
        led = constant_ledger(1, 1, d)
        vals = np.array([bd.deep_net_lower_bound(int(k), L, R, D_max, r, d, led).value for k in n])
        stripped = vals * np.log2(n) ** (r / d)
        slope = bd.fit_loglog_slope(n, stripped)
        good = abs(slope + r / d) <= 0.01
        rows.append({"r": r, "d": d, "slope": slope, "expected": -r / d})
        ok = ok and good
    return SuiteResult("rates", ok, {"fits": rows}, None if ok else [row for row in rows])


def localized(dims=(1, 2), sharpness: float = 1e3, margin: float = 0.05, n_points: int = 20_000, seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    rows, ok, witness = [], True, None
    for d in dims:
        lo, hi = np.full(d, -0.4), np.full(d, 0.3)
        arch, params = localized_net(d, lo, hi, sharpness)
        X = rng.uniform(-1, 1, (n_points, d))
        # distance to the box boundary (inside: to the nearest face; outside: to the box)
        inside = np.all((X >= lo) & (X <= hi), axis=1)
        d_in = np.min(np.minimum(X - lo, hi - X), axis=1)
        d_out = np.linalg.norm(np.maximum(0, np.maximum(lo - X, X - hi)), axis=1)
        dist = np.where(inside, d_in, d_out)
        X, inside = X[dist > margin], inside[dist > margin]
        err = np.abs(forward_batch(arch, params.values, X)[0] - inside)
        rows.append({"d": d, "points": len(X), "max_error": float(err.max())})
        if err.max() >= 0.01 and ok:
            witness = {"d": d, "x": X[int(np.argmax(err))].tolist()}
        ok = ok and err.max() < 0.01
    return SuiteResult("localized", ok, {"cases": rows}, witness)


SUITES = {
    "codes": codes,
    "separation": separation,
    "membership": membership,
    "packing": packing,
    "uniform-bound": uniform_bound,
    "epsilon-net": epsilon_net,
    "constants": constants,
    "rates": rates,
    "localized": localized,
}


def run_suites(names=None, arch: Architecture | None = None, seed: int = 0) -> list[SuiteResult]:
    """Run the named suites (all by default); ``arch`` is added to the
    fixture-based suites that can handle it."""
    names = list(names or SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    out = []
    for name in names:
        t0 = time.perf_counter()
        if name == "uniform-bound" and arch is not None:
            res = uniform_bound({**fixture_set(), "user": arch}, seed=seed)
        elif name == "epsilon-net" and arch is not None and arch.n_params <= 3:
            res = epsilon_net({**small_fixtures(), "user": arch}, seed=seed)
        elif name in ("codes", "separation", "membership", "packing", "uniform-bound", "epsilon-net", "localized"):
            res = SUITES[name](seed=seed)
        else:
            res = SUITES[name]()
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
