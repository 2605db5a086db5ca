"""Function-space numerics on the cube [-1, 1]^d.

L1 norms and distances by tensor-product quadrature, exact and greedy
packing/covering of finite function sets, and finite-difference checks of
Hölder-class membership.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "QuadratureGrid",
    "default_grid",
    "FunctionHandle",
    "Estimate",
    "l1_norm",
    "l1_distance",
    "distance_matrix",
    "write_distance_csv",
    "exact_packing_number",
    "exact_covering_number",
    "greedy_packing",
    "greedy_covering",
    "packing_from_matrix",
    "covering_from_matrix",
    "HolderReport",
    "holder_check",
    "split_smoothness",
    "SizeError",
]

HOLDER_SLACK = 0.05
EXACT_LIMIT = 25


class SizeError(ValueError):
    pass


def _rule_1d(m: int, scheme: str, breakpoints: np.ndarray):
    """Composite rule with ``m`` nodes on each piece between breakpoints."""
    if scheme == "gauss-legendre":
        t, w = np.polynomial.legendre.leggauss(m)
    elif scheme == "midpoint":
        t = -1.0 + (2.0 * np.arange(m) + 1.0) / m
        w = np.full(m, 2.0 / m)
    else:
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    lo, hi = breakpoints[:-1, None], breakpoints[1:, None]
    half = (hi - lo) / 2.0
    nodes = (lo + half * (t[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor-product rule on ``[-1, 1]^dim``.

    ``breakpoints`` (optional, per axis) splits the axis into pieces that
    each receive ``nodes_per_axis`` nodes; aligning them with the kinks of
    a piecewise-smooth integrand makes Gauss rules exact on polynomial
    pieces.
    """

    dim: int
    nodes_per_axis: int = 64
    scheme: str = "gauss-legendre"
    breakpoints: tuple | None = None
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 1 or self.nodes_per_axis < 1:
            raise ValueError("dim and nodes_per_axis must be positive")
        bp = np.array([-1.0, 1.0]) if self.breakpoints is None else np.unique(np.clip(self.breakpoints, -1, 1))
        if bp[0] != -1.0 or bp[-1] != 1.0:
            bp = np.unique(np.concatenate([[-1.0, 1.0], bp]))
        object.__setattr__(self, "breakpoints", tuple(bp.tolist()))
        x1, w1 = _rule_1d(self.nodes_per_axis, self.scheme, bp)
        grids = np.meshgrid(*([x1] * self.dim), indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=-1)
        wgrid = np.meshgrid(*([w1] * self.dim), indexing="ij")
        weights = np.prod(np.stack([g.ravel() for g in wgrid], axis=-1), axis=-1)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)

    def refined(self) -> "QuadratureGrid":
        return QuadratureGrid(self.dim, 2 * self.nodes_per_axis, self.scheme, self.breakpoints)

    def integrate(self, values) -> float:
        return float(np.asarray(values) @ self.weights)


def default_grid(dim: int, scheme: str = "gauss-legendre", breakpoints=None) -> QuadratureGrid:
    """64 nodes per axis up to d = 2, 16 for d = 3; ``NETCAP_QUAD_NODES``
    overrides."""
    import os

    env = os.environ.get("NETCAP_QUAD_NODES")
    if env:
        m = int(env)
    elif dim <= 2:
        m = 64
    elif dim == 3:
        m = 16
    else:
        raise ValueError("default quadrature only covers d <= 3")
    return QuadratureGrid(dim, m, scheme, breakpoints)


@dataclass(frozen=True)
class FunctionHandle:
    """Vectorised map ``(m, dim) -> (m,)`` on the cube, with a label."""

    fn: Callable
    dim: int
    label: str = ""

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.asarray(self.fn(X), dtype=float).reshape(X.shape[0])


class Estimate(NamedTuple):
    value: float
    tol: float


def _as_handle(f, dim):
    if isinstance(f, FunctionHandle):
        return f
    if callable(f):
        return FunctionHandle(f, dim)
    c = float(f)
    return FunctionHandle(lambda X: np.full(len(X), c), dim, label=str(c))


def _check_dim(f, grid):
    if f.dim != grid.dim:
        raise ValueError(f"function dimension {f.dim} does not match grid dimension {grid.dim}")


def l1_norm(f, grid: QuadratureGrid) -> Estimate:
    """``int |f|`` over the cube; tolerance is the change under one refinement."""
    f = _as_handle(f, grid.dim)
    _check_dim(f, grid)
    fine = grid.refined()
    v = grid.integrate(np.abs(f(grid.nodes)))
    v2 = fine.integrate(np.abs(f(fine.nodes)))
    return Estimate(v, abs(v - v2))


def l1_distance(f, g, grid: QuadratureGrid) -> Estimate:
    f = _as_handle(f, grid.dim)
    g = _as_handle(g, grid.dim)
    _check_dim(f, grid)
    _check_dim(g, grid)
    # |f - g| == |g - f| bitwise, so symmetry is exact
    return l1_norm(FunctionHandle(lambda X: f(X) - g(X), grid.dim), grid)


def _pairwise_l1(values, weights):
    k = values.shape[0]
    D = np.zeros((k, k))
    for i in range(k):
        D[i, i + 1:] = np.abs(values[i + 1:] - values[i]) @ weights
    return D + D.T


def distance_matrix(candidates: Sequence, grid: QuadratureGrid, with_tolerance: bool = True):
    """Pairwise L1 distances.  Returns ``(D, T)`` where ``T`` holds the
    per-pair refinement tolerance (zeros when ``with_tolerance`` is off)."""
    fs = [_as_handle(f, grid.dim) for f in candidates]
    for f in fs:
        _check_dim(f, grid)
    V = np.stack([f(grid.nodes) for f in fs]) if fs else np.zeros((0, len(grid)))
    D = _pairwise_l1(V, grid.weights)
    if not with_tolerance:
        return D, np.zeros_like(D)
    fine = grid.refined()
    V2 = np.stack([f(fine.nodes) for f in fs]) if fs else np.zeros((0, len(fine)))
    return D, np.abs(D - _pairwise_l1(V2, fine.weights))


def write_distance_csv(path, D, labels):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([""] + list(labels))
        for lab, row in zip(labels, D):
            w.writerow([lab] + [repr(float(v)) for v in row])


# -- packing and covering on finite sets -----------------------------------


def _max_clique(adj: list[int], k: int) -> list[int]:
    """Maximum clique by branch and bound on bitmask adjacency."""
    best: list[int] = []

    def expand(clique, cand):
        nonlocal best
        if not cand:
            if len(clique) > len(best):
                best = clique
            return
        if len(clique) + cand.bit_count() <= len(best):
            return
        while cand:
            if len(clique) + cand.bit_count() <= len(best):
                return
            v = (cand & -cand).bit_length() - 1
            cand &= ~(1 << v)
            expand(clique + [v], cand & adj[v])

    expand([], (1 << k) - 1)
    return sorted(best)


def packing_from_matrix(D: np.ndarray, eps: float) -> list[int]:
    """Indices of a maximum subset with pairwise distance >= eps."""
    k = len(D)
    adj = [sum(1 << j for j in range(k) if j != i and D[i, j] >= eps) for i in range(k)]
    return _max_clique(adj, k)


def covering_from_matrix(D: np.ndarray, eps: float) -> list[int]:
    """Indices of a minimum set of candidate centres covering every candidate
    within ``eps`` (set cover by branch and bound on the first uncovered
    element)."""
    k = len(D)
    if k == 0:
        return []
    covers = [sum(1 << j for j in range(k) if D[i, j] <= eps) for i in range(k)]
    full = (1 << k) - 1
    best = list(range(k))

    def search(chosen, covered):
        nonlocal best
        if covered == full:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        if len(chosen) + 1 >= len(best):
            return
        u = (~covered & full & -(~covered & full)).bit_length() - 1
        # any centre covering u; try the ones covering most new points first
        opts = [c for c in range(k) if covers[c] >> u & 1]
        opts.sort(key=lambda c: -(covers[c] & ~covered).bit_count())
        for c in opts:
            search(chosen + [c], covered | covers[c])

    search([], 0)
    return sorted(best)


def _matrix_for(candidates, grid):
    return distance_matrix(candidates, grid, with_tolerance=False)[0]


def exact_packing_number(candidates: Sequence, eps: float, grid: QuadratureGrid, limit: int = EXACT_LIMIT) -> int:
    if len(candidates) > limit:
        raise SizeError(f"{len(candidates)} candidates exceed exact-search limit {limit}; use greedy_packing")
    return len(packing_from_matrix(_matrix_for(candidates, grid), eps))


def exact_covering_number(candidates: Sequence, eps: float, grid: QuadratureGrid, limit: int = EXACT_LIMIT) -> int:
    """Smallest number of candidates whose closed eps-balls cover the set."""
    if len(candidates) > limit:
        raise SizeError(f"{len(candidates)} candidates exceed exact-search limit {limit}; use greedy_covering")
    return len(covering_from_matrix(_matrix_for(candidates, grid), eps))


def greedy_packing(candidates: Sequence, eps: float, grid: QuadratureGrid | None = None, *, values=None, weights=None) -> list[int]:
    """Scan candidates in order, keeping each one at distance >= eps from all
    kept so far.  The result is a maximal packing.

    Either pass function handles plus a grid, or precomputed node values
    ``(k, m)`` and quadrature weights.
    """
    if values is None:
        values = np.stack([_as_handle(f, grid.dim)(grid.nodes) for f in candidates])
        weights = grid.weights
    kept: list[int] = []
    kept_vals = np.empty((0, values.shape[1]))
    for i, v in enumerate(values):
        if kept and np.min(np.abs(kept_vals - v) @ weights) < eps:
            continue
        kept.append(i)
        kept_vals = np.vstack([kept_vals, v])
    return kept


def greedy_covering(candidates: Sequence, eps: float, grid: QuadratureGrid) -> list[int]:
    """Greedy set cover: repeatedly take the candidate whose eps-ball covers
    the most uncovered candidates (lowest index on ties)."""
    D = _matrix_for(candidates, grid)
    k = len(D)
    within = D <= eps
    uncovered = np.ones(k, dtype=bool)
    chosen = []
    while uncovered.any():
        gain = (within & uncovered[None, :]).sum(axis=1)
        c = int(np.argmax(gain))
        chosen.append(c)
        uncovered &= ~within[c]
    return sorted(chosen)


# -- Hölder membership -----------------------------------------------------


def split_smoothness(r: float) -> tuple[int, float]:
    """``r = s + v`` with integer ``s >= 0`` and ``0 < v <= 1``."""
    if r <= 0:
        raise ValueError("smoothness r must be positive")
    s = math.ceil(r) - 1
    return s, r - s


@dataclass
class HolderReport:
    r: float
    s: int
    v: float
    c0: float
    max_ratio: float
    passed: bool
    witness: tuple | None = None
    n_pairs: int = 0
    slack: float = HOLDER_SLACK

    def to_json(self):
        out = {k: getattr(self, k) for k in ("r", "s", "v", "c0", "max_ratio", "passed", "n_pairs", "slack")}
        if self.witness is not None:
            out["witness"] = [np.asarray(w).tolist() if not np.isscalar(w) else w for w in self.witness]
        return out


def _multi_indices(d: int, s: int):
    return [a for a in itertools.product(range(s + 1), repeat=d) if sum(a) == s]


def _fd_partial(f, X, alpha, h):
    """Central finite-difference estimate of the mixed partial ``alpha``."""
    d = X.shape[1]
    offsets = [[(0.0, 1.0)] if a == 0 else [((a / 2 - k) * h, (-1) ** k * math.comb(a, k) / h**a) for k in range(a + 1)]
               for a in alpha]
    total = np.zeros(len(X))
    for combo in itertools.product(*offsets):
        shift = np.array([c[0] for c in combo])
        coef = math.prod(c[1] for c in combo)
        total += coef * f(X + shift[None, :d])
    return total


def holder_check(
    f,
    r: float,
    c0: float,
    n_pairs: int = 10_000,
    fd_step: float = 1e-4,
    *,
    seed: int = 0,
    extra_pairs=None,
    slack: float = HOLDER_SLACK,
    dim: int | None = None,
) -> HolderReport:
    """Sampled Hölder check of every order-s partial of ``f``.

    Pairs come from three pools: uniform pairs on the cube, short-range
    pairs (separations log-uniform in [1e-3, 0.3]) that probe the local
    slope, and any caller-supplied ``extra_pairs`` (``(X, X')`` arrays).
    Passes when the largest ratio ``|D f(x) - D f(x')| / |x - x'|^v`` is at
    most ``c0 (1 + slack)``.
    """
    f = _as_handle(f, dim if dim is not None else getattr(f, "dim", 1))
    d = f.dim
    s, v = split_smoothness(r)
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    if s > 0 and s * fd_step >= 0.05:
        raise ValueError(f"fd_step {fd_step} too large for order-{s} differences on [-1, 1]^d")
    rng = np.random.default_rng(seed)
    n_uni = n_pairs // 2
    n_loc = n_pairs - n_uni
    X1 = rng.uniform(-1, 1, (n_uni, d))
    X2 = rng.uniform(-1, 1, (n_uni, d))
    base = rng.uniform(-1, 1, (n_loc, d))
    direction = rng.normal(size=(n_loc, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    step = 10 ** rng.uniform(-3, math.log10(0.3), n_loc)
    other = np.clip(base + step[:, None] * direction, -1, 1)
    X1 = np.vstack([X1, base])
    X2 = np.vstack([X2, other])
    if extra_pairs is not None:
        E1, E2 = (np.atleast_2d(np.asarray(e, dtype=float)) for e in extra_pairs)
        X1 = np.vstack([X1, E1])
        X2 = np.vstack([X2, E2])
    dist = np.linalg.norm(X1 - X2, axis=1)
    keep = dist > 0
    X1, X2, dist = X1[keep], X2[keep], dist[keep]
    best, witness = 0.0, None
    for alpha in _multi_indices(d, s):
        if s == 0:
            D1, D2 = f(X1), f(X2)
        else:
            D1, D2 = _fd_partial(f, X1, alpha, fd_step), _fd_partial(f, X2, alpha, fd_step)
        ratio = np.abs(D1 - D2) / dist**v
        i = int(np.argmax(ratio))
        if ratio[i] > best:
            best, witness = float(ratio[i]), (alpha, X1[i], X2[i])
    passed = best <= c0 * (1 + slack)
    return HolderReport(r, s, v, c0, best, bool(passed), None if passed else witness, int(len(dist)), slack)
