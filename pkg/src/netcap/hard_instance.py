"""Packing families of smooth functions built from sign codes and bumps.

A family member is ``f = sum_k e_k g_k`` where ``e`` runs over a sign code
with large pairwise distance and ``g_k`` is a scaled copy of one smooth
bump placed in the k-th cell of a regular partition of ``[-1, 1]^d``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .numerics import FunctionHandle, HolderReport, QuadratureGrid, SizeError, holder_check, split_smoothness

__all__ = [
    "SignCode",
    "ConstructionError",
    "BumpInfeasible",
    "gv_code",
    "code_l1_matrix",
    "smoothstep",
    "BumpSpec",
    "make_bump",
    "min_admissible_c0",
    "GridPartition",
    "HardFamily",
    "build_family",
    "family_from_manifest",
    "LocalizationResult",
    "verify_localization",
    "verify_class_membership",
    "SeparationResult",
    "verify_separation",
    "separation_bound",
    "choose_nstar",
    "MAX_CODE_WORDS",
]

LEX_MAX_M = 20
MAX_CODE_WORDS = 1 << 16


class ConstructionError(RuntimeError):
    pass


class BumpInfeasible(ValueError):
    def __init__(self, msg, min_c0):
        super().__init__(msg)
        self.min_c0 = min_c0


# -- sign codes ---------------------------------------------------------------


@dataclass
class SignCode:
    m: int
    words: np.ndarray  # (k, m) entries in {-1, +1}
    min_l1: int
    target_l1: float
    seed: int | None = None
    mode: str = "lexicographic"

    @property
    def required_size(self) -> int:
        return math.ceil(2 ** (self.m / 16))

    @property
    def complete(self) -> bool:
        """Whether the code reaches the guaranteed size ``2^{m/16}``."""
        return len(self.words) >= self.required_size

    def __len__(self):
        return len(self.words)


def code_l1_matrix(words: np.ndarray) -> np.ndarray:
    """Exact pairwise l1 distances of +-1 words: ``m - <w, w'>``."""
    W = np.asarray(words, dtype=np.int64)
    return W.shape[1] - W @ W.T


def _int_to_words(ints, m):
    bits = (np.asarray(ints, dtype=np.int64)[:, None] >> np.arange(m - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(np.int8)


def gv_code(m: int, min_l1_target: float | None = None, *, seed: int = 0, max_words: int | None = None) -> SignCode:
    """Greedy Gilbert-Varshamov sign code with pairwise l1 >= ``min_l1_target``
    (default ``m/2``).

    For ``m <= 20`` all ``2^m`` words are scanned in lexicographic order
    (-1 before +1) and each is kept unless it lies within the excluded
    Hamming ball of an earlier pick.  Longer codes draw seeded random words.
    ``max_words`` stops early; a code stopped below ``2^{m/16}`` words
    reports ``complete == False``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    target = m / 2 if min_l1_target is None else float(min_l1_target)
    t = max(1, math.ceil(target / 2))  # Hamming threshold; l1 = 2 * Hamming
    need = math.ceil(2 ** (m / 16))
    if max_words is None and need > MAX_CODE_WORDS:
        raise SizeError(f"a complete code needs {need} words; pass max_words")
    cap = max_words if max_words is not None else (None if m <= LEX_MAX_M else need)
    if m <= LEX_MAX_M:
        words_int = np.arange(1 << m, dtype=np.int64)
        ball = words_int[np.bitwise_count(words_int) < t]
        alive = np.ones(1 << m, dtype=bool)
        chosen = []
        ptr = 0
        while ptr < alive.size and (cap is None or len(chosen) < cap):
            off = int(np.argmax(alive[ptr:]))
            if not alive[ptr + off]:
                break
            w = ptr + off
            chosen.append(w)
            alive[w ^ ball] = False
            ptr = w + 1
        words = _int_to_words(chosen, m)
        mode, used_seed = "lexicographic", None
    else:
        rng = np.random.default_rng(seed)
        target_count = cap if cap is not None else need
        kept = np.empty((0, m), dtype=np.int8)
        tries = 0
        budget = 200 * target_count + 1000
        while len(kept) < target_count and tries < budget:
            batch = (2 * rng.integers(0, 2, (64, m)) - 1).astype(np.int8)
            for w in batch:
                tries += 1
                if len(kept) == 0 or np.min(np.count_nonzero(kept != w, axis=1)) >= t:
                    kept = np.vstack([kept, w])
                    if len(kept) >= target_count:
                        break
        words = kept
        mode, used_seed = "random", seed
    if max_words is None and len(words) < need:
        raise ConstructionError(f"greedy code reached {len(words)} words, needs {need}; retry with another seed")
    D = code_l1_matrix(words)
    min_l1 = int(D[np.triu_indices(len(words), 1)].min()) if len(words) > 1 else 2 * m
    if min_l1 < target:
        raise ConstructionError(f"audit failed: min l1 {min_l1} < target {target}")
    return SignCode(m, words, min_l1, target, used_seed, mode)


# -- bump ---------------------------------------------------------------------


def smoothstep(k: int) -> Polynomial:
    """Degree ``2k+1`` polynomial rising from 0 to 1 on [0, 1] with ``k``
    vanishing derivatives at both ends."""
    u = Polynomial([0, 1])
    total = Polynomial([0])
    for i in range(k + 1):
        total += math.comb(k + i, i) * math.comb(2 * k + 1, k - i) * (-u) ** i
    return u ** (k + 1) * total


def _sup_abs(p: Polynomial) -> float:
    crit = [x.real for x in p.deriv().roots() if abs(x.imag) < 1e-12 and 0 <= x.real <= 1] if p.degree() > 1 else []
    pts = np.array([0.0, 1.0] + crit)
    return float(np.max(np.abs(p(pts))))


@dataclass(frozen=True, eq=False)
class BumpSpec:
    """Tensor bump ``g(x) = prod_j phi(sqrt(d) x_j)``.

    ``phi`` is 1 on ``[-1/2, 1/2]``, 0 outside ``[-1, 1]`` and follows a
    smoothstep of degree ``2 ceil(r) + 1`` on each shoulder, so ``g`` is 1
    on the plateau cube of half-width ``1/(2 sqrt d)`` and vanishes outside
    the support cube of half-width ``1/sqrt d``.
    """

    d: int
    r: float
    c0: float
    order: int  # smoothstep order k, phi in C^k
    holder_constant: float  # bound on the Hölder constant of order-s partials
    profile: Polynomial = field(repr=False)

    @property
    def s(self) -> int:
        return split_smoothness(self.r)[0]

    @property
    def v(self) -> float:
        return split_smoothness(self.r)[1]

    @property
    def plateau_half_width(self) -> float:
        return 0.5 / math.sqrt(self.d)

    @property
    def support_half_width(self) -> float:
        return 1.0 / math.sqrt(self.d)

    def phi(self, t, deriv: int = 0):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        out = np.zeros_like(t)
        if deriv == 0:
            out[a <= 0.5] = 1.0
        sh = (a > 0.5) & (a < 1.0)
        dp = self.profile.deriv(deriv) if deriv else self.profile
        # phi(t) = S(2 (1 - |t|)); each derivative brings -2 sign(t)
        out[sh] = dp(2.0 * (1.0 - a[sh])) * (-2.0 * np.sign(t[sh])) ** deriv
        return out

    def derivative(self, alpha, X):
        """Closed-form partial ``d^alpha g`` at points ``X`` of shape (m, d)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rd = math.sqrt(self.d)
        out = np.ones(len(X))
        for j, a in enumerate(alpha):
            out *= rd**a * self.phi(rd * X[:, j], a)
        return out

    def __call__(self, X):
        return self.derivative((0,) * self.d, X)

    def l1_norm(self) -> float:
        """Exact ``int g`` (g >= 0): ``((1 + int_0^1 S) / sqrt d)^d``."""
        integ = self.profile.integ()
        return float(((1.0 + integ(1.0) - integ(0.0)) / math.sqrt(self.d)) ** self.d)

    def profile_json(self):
        return {
            "order": self.order,
            "degree": 2 * self.order + 1,
            "plateau_half_width": self.plateau_half_width,
            "support_half_width": self.support_half_width,
            "coefficients": self.profile.coef.tolist(),
        }


def _holder_bound(d: int, r: float, S: Polynomial) -> float:
    s, v = split_smoothness(r)
    # M[j] = sup |phi^(j)|
    M = [1.0] + [2.0**j * _sup_abs(S.deriv(j)) for j in range(1, s + 2)]
    rd = math.sqrt(d)
    best = 0.0
    for alpha in itertools.product(range(s + 1), repeat=d):
        if sum(alpha) != s:
            continue
        size = math.prod(rd ** a * M[a] for a in alpha)
        grad = math.sqrt(sum(
            (rd ** (alpha[i] + 1) * M[alpha[i] + 1] * math.prod(rd ** alpha[j] * M[alpha[j]] for j in range(d) if j != i)) ** 2
            for i in range(d)
        ))
        osc = 1.0 if s == 0 else 2.0 * size
        # min(L t, osc) <= L^v osc^(1-v) t^v
        best = max(best, grad**v * osc ** (1 - v))
    return best


def min_admissible_c0(d: int, r: float) -> float:
    """Smallest class constant for which the bump certifies."""
    S = smoothstep(math.ceil(r))
    _, v = split_smoothness(r)
    return _holder_bound(d, r, S) / 2 ** (v - 1)


def make_bump(d: int, r: float, c0: float) -> BumpSpec:
    """Bump with Hölder constant at most ``c0 2^{v-1}`` for its order-s partials.

    The profile is fixed by ``(d, r)``; when its certified constant exceeds
    ``c0 2^{v-1}`` no plateau-preserving rescaling helps and
    :class:`BumpInfeasible` reports the smallest admissible ``c0``.
    """
    if d < 1 or r <= 0 or c0 <= 0:
        raise ValueError("need d >= 1, r > 0, c0 > 0")
    k = math.ceil(r)
    S = smoothstep(k)
    _, v = split_smoothness(r)
    K = _holder_bound(d, r, S)
    if K > c0 * 2 ** (v - 1):
        need = K / 2 ** (v - 1)
        raise BumpInfeasible(f"c0={c0} too small for d={d}, r={r}; minimal admissible c0 is {need:.6g}", need)
    return BumpSpec(d, float(r), float(c0), k, K, S)


# -- partition and family -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridPartition:
    """``n_star^d`` congruent cells of side ``2/n_star`` tiling ``[-1, 1]^d``."""

    d: int
    n_star: int

    def __post_init__(self):
        if self.n_star < 1:
            raise ValueError("n_star must be >= 1")

    @property
    def side(self) -> float:
        return 2.0 / self.n_star

    @property
    def n_cells(self) -> int:
        return self.n_star**self.d

    @property
    def axis_centers(self) -> np.ndarray:
        return -1.0 + (2 * np.arange(self.n_star) + 1) / self.n_star

    @property
    def centers(self) -> np.ndarray:
        c = self.axis_centers
        return np.array(list(itertools.product(c, repeat=self.d)), dtype=float).reshape(-1, self.d)

    def cell_of(self, X) -> np.ndarray:
        """Flat cell index (C order) of each point; points off the cube map
        to the nearest cell."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ij = np.clip(np.floor((X + 1.0) * self.n_star / 2.0).astype(int), 0, self.n_star - 1)
        return np.ravel_multi_index(tuple(ij.T), (self.n_star,) * self.d)


@dataclass(frozen=True, eq=False)
class HardFamily:
    bump: BumpSpec
    partition: GridPartition
    code: SignCode

    @property
    def amplitude(self) -> float:
        return float(self.partition.n_star ** (-self.bump.r))

    def g_k(self, k: int, X) -> np.ndarray:
        """``n_star^{-r} g(n_star (x - xi_k))``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        N = self.partition.n_star
        return self.amplitude * self.bump(N * (X - self.partition.centers[k]))

    def combination(self, signs) -> FunctionHandle:
        signs = np.asarray(signs, dtype=float)
        if signs.shape != (self.partition.n_cells,):
            raise ValueError(f"need {self.partition.n_cells} signs")
        centers = self.partition.centers
        N = self.partition.n_star
        amp = self.amplitude
        bump = self.bump

        def fn(X):
            # only the bump of the containing cell can be nonzero
            k = self.partition.cell_of(X)
            return signs[k] * amp * bump(N * (X - centers[k]))

        return FunctionHandle(fn, self.bump.d, label="member")

    def member(self, i: int) -> FunctionHandle:
        f = self.combination(self.code.words[i])
        return FunctionHandle(f.fn, f.dim, label=f"member[{i}]")

    def breakpoints(self) -> np.ndarray:
        """Cell faces and bump kinks along one axis."""
        N = self.partition.n_star
        c = self.partition.axis_centers
        off = np.array([-1.0, -0.5, 0.5, 1.0]) / (math.sqrt(self.bump.d) * N)
        edges = -1.0 + 2.0 * np.arange(N + 1) / N
        return np.unique(np.clip(np.concatenate([edges, (c[:, None] + off[None, :]).ravel()]), -1, 1))

    def quadrature_grid(self, nodes_per_piece: int = 8) -> QuadratureGrid:
        """Gauss rule aligned with every kink: exact on the polynomial pieces
        once ``nodes_per_piece >= order + 1``."""
        return QuadratureGrid(self.bump.d, nodes_per_piece, "gauss-legendre", tuple(self.breakpoints()))

    def closed_form_distance(self, i: int, j: int) -> float:
        """``n_star^{-r-d} ||g||_1 sum_k |e_k - e'_k|`` (exact by localization)."""
        N = self.partition.n_star
        l1 = float(np.abs(self.code.words[i].astype(int) - self.code.words[j]).sum())
        return N ** (-self.bump.r - self.bump.d) * self.bump.l1_norm() * l1

    def manifest(self) -> dict:
        return {
            "d": self.bump.d,
            "r": self.bump.r,
            "c0": self.bump.c0,
            "n_star": self.partition.n_star,
            "seed": self.code.seed,
            "code_mode": self.code.mode,
            "code_target_l1": self.code.target_l1,
            "code": self.code.words.astype(int).tolist(),
            "profile": self.bump.profile_json(),
        }


def build_family(n_star: int, bump: BumpSpec, code: SignCode | None = None, *, seed: int = 0, max_words: int | None = None) -> HardFamily:
    part = GridPartition(bump.d, n_star)
    if code is None:
        code = gv_code(part.n_cells, seed=seed, max_words=max_words)
    if code.m != part.n_cells:
        raise ValueError(f"code length {code.m} != number of cells {part.n_cells}")
    return HardFamily(bump, part, code)


def family_from_manifest(doc: dict) -> HardFamily:
    bump = make_bump(doc["d"], doc["r"], doc["c0"])
    words = np.asarray(doc["code"], dtype=np.int8)
    D = code_l1_matrix(words)
    min_l1 = int(D[np.triu_indices(len(words), 1)].min()) if len(words) > 1 else 2 * words.shape[1]
    code = SignCode(words.shape[1], words, min_l1, doc.get("code_target_l1", words.shape[1] / 2),
                    doc.get("seed"), doc.get("code_mode", "lexicographic"))
    return HardFamily(bump, GridPartition(doc["d"], doc["n_star"]), code)


# -- verification -------------------------------------------------------------


@dataclass
class LocalizationResult:
    passed: bool
    n_points: int
    max_active: int
    witness: np.ndarray | None = None


def verify_localization(family: HardFamily, sample_points) -> LocalizationResult:
    """Evaluates every ``g_k`` at every point (no cell lookup) and checks
    that at most one is nonzero."""
    X = np.atleast_2d(np.asarray(sample_points, dtype=float))
    active = np.zeros(len(X), dtype=int)
    for k in range(family.partition.n_cells):
        active += family.g_k(k, X) != 0
    worst = int(active.max()) if len(X) else 0
    bad = np.nonzero(active > 1)[0]
    return LocalizationResult(bad.size == 0, len(X), worst, X[bad[0]] if bad.size else None)


def _boundary_pairs(family: HardFamily, n: int, fd_step: float, rng):
    """Pairs straddling cell faces: half within ``2 fd_step`` of the face,
    half spread across the two neighbouring cells."""
    part = family.partition
    d, N = part.d, part.n_star
    if N == 1:
        return None
    X1 = rng.uniform(-1, 1, (n, d))
    X2 = X1.copy()
    axis = rng.integers(0, d, n)
    face = -1.0 + 2.0 * rng.integers(1, N, n) / N
    near = np.arange(n) < n // 2
    reach = np.where(near, 2 * fd_step, part.side)
    a = rng.uniform(0, 1, n) * reach
    b = rng.uniform(0, 1, n) * reach
    rows = np.arange(n)
    X1[rows, axis] = face - a
    X2[rows, axis] = face + b
    # jitter the other coordinates of the partner point
    X2 += np.where(np.arange(d)[None, :] == axis[:, None], 0.0, rng.normal(scale=0.1 / N, size=(n, d)))
    return np.clip(X1, -1, 1), np.clip(X2, -1, 1)


def verify_class_membership(
    family: HardFamily, n_members: int = 8, n_pairs: int = 4000, *, fd_step: float = 1e-4, seed: int = 0
) -> tuple[HolderReport, list]:
    """Hölder check at ``(r, c0)`` for sampled members, with boundary-pair
    oversampling.  Returns the worst report and all per-member reports."""
    rng = np.random.default_rng(seed)
    k = len(family.code)
    picks = sorted(set([0] + rng.choice(k, size=min(n_members, k), replace=False).tolist()))[:max(1, n_members)]
    reports = []
    for i in picks:
        extra = _boundary_pairs(family, n_pairs // 2, fd_step, rng)
        rep = holder_check(family.member(i), family.bump.r, family.bump.c0, n_pairs, fd_step,
                           seed=int(rng.integers(1 << 31)), extra_pairs=extra)
        reports.append(rep)
    worst = max(reports, key=lambda rep: rep.max_ratio)
    if not all(rep.passed for rep in reports):
        worst = next(rep for rep in reports if not rep.passed)
    return worst, reports


def separation_bound(d: int, r: float, n_star: int) -> float:
    """``(1/2) d^{-d/2} n_star^{-r}``."""
    return 0.5 * d ** (-d / 2) * n_star ** (-r)


@dataclass
class SeparationResult:
    min_distance: float
    bound: float
    max_tolerance: float
    max_closed_form_rel_err: float
    pairs_checked: int
    violation: bool
    witness: tuple | None = None

    def to_json(self):
        out = {k: getattr(self, k) for k in
               ("min_distance", "bound", "max_tolerance", "max_closed_form_rel_err", "pairs_checked", "violation")}
        out["witness"] = list(self.witness) if self.witness else None
        return out


def verify_separation(family: HardFamily, pair_budget: int = 200, grid: QuadratureGrid | None = None) -> SeparationResult:
    """Quadrature L1 distances for up to ``pair_budget`` code pairs, closest
    code pairs first (all pairs when they fit the budget)."""
    k = len(family.code)
    if k < 2:
        raise ValueError("separation needs at least two code words")
    grid = grid or family.quadrature_grid()
    fine = grid.refined()
    D = code_l1_matrix(family.code.words)
    iu, ju = np.triu_indices(k, 1)
    order = np.argsort(D[iu, ju], kind="stable")[:pair_budget]
    pairs = list(zip(iu[order].tolist(), ju[order].tolist()))
    used = sorted({i for p in pairs for i in p})
    vals = {i: family.member(i)(grid.nodes) for i in used}
    vals_f = {i: family.member(i)(fine.nodes) for i in used}
    bound = separation_bound(family.bump.d, family.bump.r, family.partition.n_star)
    best, best_pair, max_tol, max_rel = math.inf, None, 0.0, 0.0
    violation = False
    for i, j in pairs:
        dist = grid.integrate(np.abs(vals[i] - vals[j]))
        tol = abs(dist - fine.integrate(np.abs(vals_f[i] - vals_f[j])))
        closed = family.closed_form_distance(i, j)
        max_rel = max(max_rel, abs(dist - closed) / closed)
        max_tol = max(max_tol, tol)
        if dist < bound - tol:
            violation = True
        if dist < best:
            best, best_pair = dist, (i, j)
    return SeparationResult(best, bound, max_tol, max_rel, len(pairs), violation, best_pair)


def choose_nstar(n: int, d: int, r: float, beta: float = 0.0, c_tilde1: float = 1.0, c_tilde2: float = 1.0) -> int:
    """Smallest integer ``N`` with ``N^d`` at least
    ``ceil(32 (1 + beta + 3r/d) n log2(2 C1 + 8 d^{d/2} (1 + beta + 3r/d + C2) + n))``."""
    if n < 1 or d < 1 or r <= 0 or c_tilde1 <= 0 or c_tilde2 <= 0 or beta < 0:
        raise ValueError("choose_nstar needs positive inputs and beta >= 0")
    q = 1 + beta + 3 * r / d
    target = math.ceil(32 * q * n * math.log2(2 * c_tilde1 + 8 * d ** (d / 2) * (q + c_tilde2) + n))
    N = max(1, math.ceil(target ** (1.0 / d)))
    while N > 1 and (N - 1) ** d >= target:
        N -= 1
    while N**d < target:
        N += 1
    return N
