"""Closed-form approximation lower bounds and reference rate curves.

Lower bounds come with a derivation trail: every intermediate constant is
recorded so that a certificate can be audited and recomputed exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .capacity import ConstantLedger

__all__ = [
    "RelationInputs",
    "LowerBoundCertificate",
    "relation_lower_bound",
    "deep_net_lower_bound",
    "relation_inputs_for_deep_net",
    "chain_ratio_floor",
    "recompute",
    "RateCurve",
    "CURVE_IDS",
    "rate_curve",
    "GapTable",
    "gap_report",
    "fit_loglog_slope",
    "fit_polylog",
]

CURVE_IDS = ("shallow-upper", "relu-deep-upper", "deep-lower", "shallow-covering", "vc-covering")
GAP_CURVES = ("shallow-upper", "relu-deep-upper", "deep-lower")


def _exact(x) -> str:
    return str(Fraction(x)) if isinstance(x, (int, float)) else str(x)


@dataclass(frozen=True)
class RelationInputs:
    """Covering condition ``N(eps, V) <= C1 (C2 n^beta / eps)^n``."""

    c_tilde1: float
    c_tilde2: float
    beta: float
    n: int
    r: float
    d: int
    c0: float = 1.0

    def __post_init__(self):
        if self.c_tilde1 <= 0 or self.c_tilde2 <= 0 or self.beta < 0 or self.n < 1 or self.r <= 0 or self.d < 1:
            raise ValueError("relation inputs need C1, C2, r > 0, beta >= 0, n, d >= 1")


@dataclass
class LowerBoundCertificate:
    kind: str  # "relation" | "deep-net"
    inputs: dict
    constant: float
    value: float
    trail: dict = field(default_factory=dict)
    n_star: int | None = None
    exact_inputs: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


def relation_lower_bound(inputs: RelationInputs) -> LowerBoundCertificate:
    """``C' (n log2(n+1))^{-r/d}`` for any class meeting the covering condition."""
    from .hard_instance import choose_nstar

    p = inputs
    rd = p.r / p.d
    q = 1 + p.beta + 3 * p.r / p.d
    inner = 2 * p.c_tilde1 + 8 * p.d ** (p.d / 2) * (q + p.c_tilde2)
    bracket = 32 * q * (math.log2(inner) + 1)
    c_prime = 0.25 * p.d ** (-p.d / 2) * bracket ** (-rd)
    value = c_prime * (p.n * math.log2(p.n + 1)) ** (-rd)
    n_star = choose_nstar(p.n, p.d, p.r, p.beta, p.c_tilde1, p.c_tilde2)
    trail = {"q": q, "log2_argument": inner, "bracket": bracket, "C_prime": c_prime,
             "packing_eps0": 0.25 * p.d ** (-p.d / 2) * n_star ** (-p.r)}
    ins = asdict(p)
    return LowerBoundCertificate("relation", ins, c_prime, value, trail, n_star, {k: _exact(v) for k, v in ins.items()})


def deep_net_lower_bound(n: int, L: int, R: float, D_max: int, r: float, d: int, ledger: ConstantLedger) -> LowerBoundCertificate:
    """``C [L^2 n log2 n log2(R D_max)]^{-r/d}`` with ``C = 3^{-r/d} C1bar``
    and ``C1bar = (1/2) [128 (1 + 3r/d) (log2(48 d^{d/2} c3) + 1)]^{-r/d}``."""
    if n < 2:
        raise ValueError("deep-net lower bound needs n >= 2 (log2 n > 0)")
    if R * D_max < 2:
        raise ValueError("deep-net lower bound needs R * D_max >= 2")
    if L < 1:
        raise ValueError("L must be >= 1")
    rd = r / d
    c3 = ledger.c3
    log_term = math.log2(48 * d ** (d / 2) * c3) + 1
    c1bar = 0.5 * (128 * (1 + 3 * r / d) * log_term) ** (-rd)
    C = 3 ** (-rd) * c1bar
    value = C * (L**2 * n * math.log2(n) * math.log2(R * D_max)) ** (-rd)
    ins = {"n": n, "L": L, "R": R, "D_max": D_max, "r": r, "d": d, "ledger": ledger.to_json()}
    trail = {"c3": c3, "log2(48 d^(d/2) c3) + 1": log_term, "C1bar_prime": c1bar, "C": C,
             "parenthesization": "(log2(48 d^(d/2) c3) + 1)"}
    exact = {k: _exact(v) for k, v in ins.items() if k != "ledger"}
    return LowerBoundCertificate("deep-net", ins, C, value, trail, None, exact)


def recompute(cert: LowerBoundCertificate) -> LowerBoundCertificate:
    """Re-derive a certificate from its recorded inputs."""
    if cert.kind == "relation":
        return relation_lower_bound(RelationInputs(**cert.inputs))
    ins = dict(cert.inputs)
    led = ConstantLedger(**ins.pop("ledger"))
    return deep_net_lower_bound(ledger=led, **ins)


def relation_inputs_for_deep_net(n: int, L: int, R: float, D_max: int, r: float, d: int, ledger: ConstantLedger) -> RelationInputs:
    """Covering-condition constants for the deep-net class:
    ``C1 = 1, beta = 0, C2 = (c3 R D_max)^{2 (L+1) L}``."""
    return RelationInputs(1.0, float((ledger.c3 * R * D_max) ** (2 * (L + 1) * L)), 0.0, n, r, d)


def chain_ratio_floor(L: int, R: float, D_max: int, r: float, d: int, ledger: ConstantLedger) -> float:
    """Guaranteed lower limit of relation-bound / deep-net-bound.

    The simplification from the relation constant to ``C`` replaces
    ``(1/4) d^{-d/2}`` by ``1/2`` and absorbs a ``+1`` into the bracket, so
    the two bounds agree only up to
    ``(1/2) d^{-d/2} (1 + 1/(2 L (L+1) A log2(R D_max)))^{-r/d}``
    with ``A = log2(48 d^{d/2} c3) + 1``.
    """
    A = math.log2(48 * d ** (d / 2) * ledger.c3) + 1
    delta = 1.0 / (2 * L * (L + 1) * A * math.log2(R * D_max))
    return 0.5 * d ** (-d / 2) * (1 + delta) ** (-r / d)


# -- rate curves --------------------------------------------------------------


@dataclass
class RateCurve:
    id: str
    r: float
    d: int
    params: dict
    constant_known: bool
    log2_form: bool = False

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        rd = self.r / self.d
        if self.id == "shallow-upper":
            return n ** (-rd)
        if self.id == "relu-deep-upper":
            return n ** (-rd) * np.log(n)
        if self.id == "deep-lower":
            p = self.params
            led = p["ledger"]
            return np.array([deep_net_lower_bound(int(k), p["L"], p["R"], p["D_max"], self.r, self.d, led).value
                             for k in np.atleast_1d(n)]).reshape(n.shape)
        eps = self.params.get("eps", 0.1)
        R = self.params.get("R", 1.0)
        if self.id == "shallow-covering":
            return n * math.log2(R / eps)
        if self.id == "vc-covering":
            return self.params.get("L", 1) ** 2 * n * math.log2(R / eps)
        raise ValueError(f"unknown curve {self.id!r}")

    def to_json(self):
        out = {"id": self.id, "r": self.r, "d": self.d, "constant_known": self.constant_known, "log2_form": self.log2_form}
        out["params"] = {k: (v.to_json() if hasattr(v, "to_json") else v) for k, v in self.params.items()}
        return out


def rate_curve(id: str, r: float, d: int, params: dict | None = None) -> RateCurve:
    """Evaluable reference curve.  Only ``deep-lower`` carries its true
    constant; the others are unit-constant rates, comparable by slope."""
    if id not in CURVE_IDS:
        raise ValueError(f"unknown curve id {id!r}; choose from {CURVE_IDS}")
    params = dict(params or {})
    if id == "deep-lower":
        for key in ("L", "R", "D_max", "ledger"):
            if key not in params:
                raise ValueError(f"deep-lower curve needs parameter {key!r}")
    return RateCurve(id, r, d, params, constant_known=id == "deep-lower", log2_form=id.endswith("covering"))


@dataclass
class GapTable:
    r: float
    d: int
    L: int
    n: list
    curves: dict  # id -> list of values (absolute or normalised)
    constant_known: dict
    ratio: list  # normalised shallow-upper / normalised deep-lower

    def rows(self):
        for i, n in enumerate(self.n):
            for cid in self.curves:
                yield n, cid, self.curves[cid][i], self.constant_known[cid]

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "curve_id", "value_or_normalized", "constant_known"])
            for n, cid, v, known in self.rows():
                w.writerow([n, cid, repr(float(v)), str(known).lower()])

    def to_json(self):
        return asdict(self)


def gap_report(r: float, d: int, L: int, n_range, ledger: ConstantLedger, R: float = 1.0, D_max: int = 2) -> GapTable:
    """Tabulate the approximation curves over ``n_range``.

    Curves with unknown constants are normalised to 1 at the smallest n;
    ``ratio`` compares normalised shallow-upper with normalised deep-lower
    and grows only like a power of log n.
    """
    ns = sorted(int(n) for n in n_range)
    if not ns:
        raise ValueError("n_range must be nonempty")
    params = {"L": L, "R": R, "D_max": D_max, "ledger": ledger}
    curves, known = {}, {}
    raw = {}
    for cid in GAP_CURVES:
        c = rate_curve(cid, r, d, params if cid == "deep-lower" else None)
        vals = np.asarray(c(np.array(ns, dtype=float)), dtype=float)
        raw[cid] = vals
        curves[cid] = (vals if c.constant_known else vals / vals[0]).tolist()
        known[cid] = c.constant_known
    lower_norm = raw["deep-lower"] / raw["deep-lower"][0]
    ratio = (raw["shallow-upper"] / raw["shallow-upper"][0] / lower_norm).tolist()
    return GapTable(r, d, L, ns, curves, known, ratio)


def fit_loglog_slope(n, values) -> float:
    """Least-squares slope of log(values) against log(n)."""
    slope, _ = np.polyfit(np.log(np.asarray(n, dtype=float)), np.log(np.asarray(values, dtype=float)), 1)
    return float(slope)


def fit_polylog(n, values) -> tuple[float, float]:
    """Fit ``values ~ a (log n)^b``; returns ``(a, b)``."""
    b, loga = np.polyfit(np.log(np.log(np.asarray(n, dtype=float))), np.log(np.asarray(values, dtype=float)), 1)
    return float(math.exp(loga)), float(b)
