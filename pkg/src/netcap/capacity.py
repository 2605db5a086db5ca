"""Covering-number bounds and explicit epsilon-nets for structured nets.

All covering quantities are base-2 logarithms: even a five-parameter toy
net has a bound above 1e80.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .network import Architecture, forward_batch, free_param_count
from .numerics import QuadratureGrid, SizeError, default_grid, greedy_packing

__all__ = [
    "ConstantLedger",
    "constant_ledger",
    "ledger_for",
    "matrix_net_size",
    "build_interval_net",
    "layer_recursion_bound",
    "CoveringBound",
    "network_covering_bound",
    "sensitivity",
    "Sensitivity",
    "EpsilonNet",
    "enumerate_epsilon_net",
    "PackingReport",
    "packing_vs_bound_report",
    "parameter_grid",
    "write_packing_csv",
    "MAX_ENUM_PARAMS",
    "MAX_AXIS_POINTS",
]

MAX_ENUM_PARAMS = 6
MAX_AXIS_POINTS = 32


@dataclass(frozen=True)
class ConstantLedger:
    c: float
    c1: float
    d: int
    c1_prime: float
    c2_prime: float
    c3: float

    def b_ell(self, ell: int, R: float, widths) -> float:
        """The staged constant ``B_ell`` for ``1 <= ell <= L + 1``.

        ``widths`` are ``d_0, ..., d_L``; ``D_ell = d_ell ... d_0``.
        """
        L = len(widths) - 1
        D = np.cumprod(np.asarray(widths, dtype=float))
        m = max(self.c1_prime, self.c2_prime) * R
        if 1 <= ell <= L - 1:
            return 2 * m**ell * D[ell] ** 2 * D[ell + 1]
        if ell == L:
            return 2 * m**L * D[L] ** 2
        if ell == L + 1:
            return 2 * m ** (L + 1) * D[L] ** 2
        raise ValueError(f"ell must be in 1..{L + 1}")

    def to_json(self):
        return asdict(self)


def constant_ledger(c: float, c1: float, d: int) -> ConstantLedger:
    if c < 1 or c1 <= 0 or d < 1:
        raise ValueError("need c >= 1, c1 > 0, d >= 1")
    c1p = 6 * c1 * c * (1 + 2 ** (d + 1))
    c2p = 2 * c * (1 + 2 ** (d + 1))
    return ConstantLedger(c, c1, d, c1p, c2p, 2 * max(c1p, c2p))


def ledger_for(arch: Architecture) -> ConstantLedger:
    """Ledger with the worst activation constants over all layers."""
    c = max(l.activation.growth_c for l in arch.layers)
    c1 = max(l.activation.lipschitz_c1 for l in arch.layers)
    return constant_ledger(c, c1, arch.input_dim)


def matrix_net_size(d_out: int, d_in: int, free_count: int, R: float, eps: float) -> float:
    """log2 of the net size ``(2 d_out d_in R / eps)^F`` for a structured
    matrix in the entrywise 1-norm; 0 once a single point suffices."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    ratio = 2 * d_out * d_in * R / eps
    if free_count == 0 or ratio <= 1:
        return 0.0
    return free_count * math.log2(ratio)


def build_interval_net(R: float, eps: float) -> np.ndarray:
    """``ceil(R/eps)`` equispaced points whose eps-balls cover ``[-R, R]``."""
    if not 0 < eps:
        raise ValueError("eps must be positive")
    k = max(1, math.ceil(R / eps - 1e-12))
    return -R + (2 * np.arange(k) + 1) * R / k


def layer_recursion_bound(arch: Architecture, ell: int, eps: float) -> float:
    """log2 of the layer-wise covering recursion unrolled down to layer 1.

    Each level contributes ``F_l (l log2(c1' R) + 2 log2 D_l - log2 eps)``
    (clamped at 0) and passes ``eps / ((c1' R)^{l-1} D_l)`` down.
    """
    if not 1 <= ell <= arch.depth:
        raise ValueError(f"ell must be in 1..{arch.depth}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    led = ledger_for(arch)
    a = led.c1_prime * arch.radius
    total = 0.0
    e = eps
    for level in range(ell, 1, -1):
        layer = arch.layers[level - 1]
        F = layer.free_w + layer.free_b
        D = arch.d_prod(level)
        total += max(0.0, F * (level * math.log2(a) + 2 * math.log2(D) - math.log2(e)))
        e = e / (a ** (level - 1) * D)
    first = arch.layers[0]
    F1 = first.free_w + first.free_b
    total += max(0.0, F1 * math.log2(a * arch.d_prod(1) / e))
    return total


@dataclass
class CoveringBound:
    epsilon: float
    log2_tight: float
    log2_relaxed: float
    log2_staged: float
    ledger: ConstantLedger
    n: int
    L: int
    R: float
    D_max: int
    D_L: int

    def to_json(self):
        out = asdict(self)
        out["ledger"] = self.ledger.to_json()
        return out


def network_covering_bound(arch: Architecture, eps: float, ledger: ConstantLedger | None = None) -> CoveringBound:
    """Covering bound for the whole class in L1, in three forms.

    ``log2_tight``   ((c3 R)^{L+1} D_L^3)^{(L+1) n} eps^{-n}
    ``log2_relaxed`` (c3 R D_max)^{3 (L+1)^2 n} eps^{-n}
    ``log2_staged``  B_{L+1}^{F_La} prod_l B_l^{F_l + F_1 + ... + F_l} eps^{-n},
                     the product before the final crude maximisation.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    led = ledger if ledger is not None else ledger_for(arch)
    n = free_param_count(arch)
    L = arch.depth
    R = arch.radius
    D_L = arch.d_prod(L)
    D_max = arch.d_max
    le = math.log2(eps)
    tight = (L + 1) * n * ((L + 1) * math.log2(led.c3 * R) + 3 * math.log2(D_L)) - n * le
    relaxed = 3 * (L + 1) ** 2 * n * math.log2(led.c3 * R * D_max) - n * le
    F = [l.free_w + l.free_b for l in arch.layers]
    widths = arch.widths
    staged = arch.free_a * math.log2(led.b_ell(L + 1, R, widths))
    for ell in range(1, L + 1):
        staged += (F[ell - 1] + sum(F[:ell])) * math.log2(led.b_ell(ell, R, widths))
    staged -= n * le
    return CoveringBound(eps, tight, relaxed, staged, led, n, L, R, D_max, D_L)


# -- explicit nets ----------------------------------------------------------


@dataclass
class Sensitivity:
    """Per-parameter L1 sensitivities and the layer norm bounds behind them."""

    per_param: np.ndarray
    sup_bounds: list
    l1_bounds: list
    perturbation: list  # per layer, (n_params, d_l) L1 deviation per unit change

    @property
    def total(self) -> float:
        return float(self.per_param.sum())

    def to_json(self):
        return {
            "per_param": self.per_param.tolist(),
            "sup_bounds": [b.tolist() for b in self.sup_bounds],
            "l1_bounds": [b.tolist() for b in self.l1_bounds],
        }


def _abs_bound(idx, fixed, R):
    return np.where(idx >= 0, R, np.abs(fixed))


def sensitivity(arch: Architecture) -> Sensitivity:
    """Constants ``S_p`` with ``||f_t - f_t'||_1 <= sum_p S_p |t_p - t'_p|``
    over the parameter box.

    Propagates, layer by layer, sup and L1 bounds of every unit and the L1
    deviation caused by a unit change of each parameter: a weight change
    costs ``c1 |dW| ||h_{l-1}||_1``, a bias change ``c1 2^d |db|``, and
    upstream deviations are amplified by ``c1 sum_j |W_ij|``.
    """
    d = arch.input_dim
    R = arch.radius
    vol = 2.0**d
    n = arch.n_params
    H = np.ones(d)  # sup |x_j|
    N = np.full(d, 2.0 ** (d - 1))  # int |x_j| over the cube
    E = np.zeros((n, d))
    sups, l1s, perts = [], [], []
    for layer in arch.layers:
        act = layer.activation
        Wabs = _abs_bound(layer.w_index, layer.w_fixed, R)
        Babs = _abs_bound(layer.b_index, layer.b_fixed, R)
        pre_sup = Wabs @ H + Babs
        H_new = act.growth_c * (pre_sup + 1)
        if act.sup_bound is not None:
            H_new = np.minimum(H_new, act.sup_bound)
        N_new = np.minimum(vol * H_new, act.growth_c * (Wabs @ N + vol * Babs + vol))
        E_new = E @ Wabs.T  # upstream deviations
        for p in range(n):
            E_new[p] += ((layer.w_index == p) * N[None, :]).sum(axis=1) + vol * (layer.b_index == p)
        E_new *= act.lipschitz_c1
        H, N, E = H_new, N_new, E_new
        sups.append(H)
        l1s.append(N)
        perts.append(E)
    Aabs = _abs_bound(arch.a_index, arch.a_fixed, R)
    S = E @ Aabs
    for p in range(n):
        S[p] += N[arch.a_index == p].sum()
    return Sensitivity(S, sups, l1s, perts)


@dataclass
class EpsilonNet:
    architecture: Architecture
    epsilon: float
    radius: float  # certified: sum_p S_p * half-spacing_p
    axes: list
    sensitivity: Sensitivity

    @property
    def size(self) -> int:
        return int(np.prod([len(a) for a in self.axes], dtype=object))

    @property
    def points(self) -> np.ndarray:
        if not self.axes:
            return np.zeros((1, 0))
        return np.array(list(itertools.product(*self.axes)), dtype=float)

    def nearest(self, thetas) -> np.ndarray:
        """Coordinatewise nearest net point for each row of ``thetas``."""
        thetas = np.atleast_2d(thetas)
        out = np.empty_like(thetas)
        for p, axis in enumerate(self.axes):
            out[:, p] = axis[np.argmin(np.abs(thetas[:, p, None] - axis[None, :]), axis=1)]
        return out

    def validate(self, n_samples: int = 1000, grid: QuadratureGrid | None = None, seed: int = 0):
        """Largest sampled L1 distance to the net and its quadrature tolerance."""
        grid = grid or default_grid(self.architecture.input_dim)
        rng = np.random.default_rng(seed)
        R = self.architecture.radius
        thetas = rng.uniform(-R, R, (n_samples, self.architecture.n_params))
        near = self.nearest(thetas)
        dists = []
        for g in (grid, grid.refined()):
            diff = forward_batch(self.architecture, thetas, g.nodes) - forward_batch(self.architecture, near, g.nodes)
            dists.append(np.abs(diff) @ g.weights)
        tol = np.abs(dists[0] - dists[1])
        return float(dists[0].max()), float(tol.max()), dists[0], tol

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "certified_radius": self.radius,
            "size": self.size,
            "axes": [a.tolist() for a in self.axes],
            "sensitivity": self.sensitivity.to_json(),
        }


def enumerate_epsilon_net(arch: Architecture, eps: float, grid: QuadratureGrid | None = None) -> EpsilonNet:
    """Product grid over the parameter box whose function-space L1 covering
    radius is certified ``<= eps`` through :func:`sensitivity`.

    The radius budget is split evenly across parameters, then axes are
    coarsened greedily while the certified radius stays within ``eps``.
    ``grid`` is unused by the construction; pass it to
    :meth:`EpsilonNet.validate`.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = arch.n_params
    if n > MAX_ENUM_PARAMS:
        raise SizeError(f"{n} parameters exceed the enumeration guard ({MAX_ENUM_PARAMS})")
    sens = sensitivity(arch)
    S = sens.per_param
    R = arch.radius
    active = S > 0
    k = np.ones(n, dtype=int)
    if active.any():
        k[active] = np.ceil(R * S[active] * active.sum() / eps - 1e-12).astype(int)
    k = np.maximum(k, 1)

    def radius(kk):
        return float(np.sum(S * R / kk))

    improved = True
    while improved:
        improved = False
        for p in np.argsort(-k, kind="stable"):
            if k[p] > 1:
                trial = k.copy()
                trial[p] -= 1
                if radius(trial) <= eps:
                    k = trial
                    improved = True
    if np.any(k > MAX_AXIS_POINTS):
        raise SizeError(f"per-parameter grid of {int(k.max())} points exceeds guard ({MAX_AXIS_POINTS})")
    axes = [build_interval_net(R, R / kp) if kp > 1 else np.zeros(1) for kp in k]
    return EpsilonNet(arch, eps, radius(k), axes, sens)


# -- packing versus bound ---------------------------------------------------


def parameter_grid(arch: Architecture, per_axis: int = 11) -> np.ndarray:
    R = arch.radius
    axis = np.linspace(-R, R, per_axis)
    return np.array(list(itertools.product(axis, repeat=arch.n_params)), dtype=float)


@dataclass
class PackingReport:
    epsilon: float
    n_samples: int
    empirical_packing: int
    log2_tight: float
    log2_relaxed: float
    violation: bool
    seed: int | None = None
    packing_indices: list = field(default_factory=list, repr=False)

    def to_json(self):
        out = asdict(self)
        out.pop("packing_indices")
        return out

    def csv_row(self):
        return [self.epsilon, self.empirical_packing, self.log2_tight, self.log2_relaxed]


def write_packing_csv(path, reports):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "empirical_packing", "log2_tight", "log2_relaxed"])
        for rep in reports:
            w.writerow([repr(float(v)) for v in rep.csv_row()])


def packing_vs_bound_report(
    arch: Architecture, eps: float, param_samples, grid: QuadratureGrid | None = None, seed: int | None = None
) -> PackingReport:
    """Greedy packing count at ``2 eps`` over the sampled functions against
    the covering bound at ``eps``; a packing above the bound is flagged."""
    grid = grid or default_grid(arch.input_dim)
    thetas = np.atleast_2d(np.asarray(param_samples, dtype=float))
    values = forward_batch(arch, thetas, grid.nodes)
    kept = greedy_packing(None, 2 * eps, values=values, weights=grid.weights)
    bound = network_covering_bound(arch, eps)
    violation = math.log2(len(kept)) > bound.log2_tight
    return PackingReport(eps, len(thetas), len(kept), bound.log2_tight, bound.log2_relaxed, violation, seed, kept)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)
