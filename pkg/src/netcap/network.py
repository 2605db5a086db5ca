"""Deep nets with fixed weight structure.

A network is a stack of affine-plus-activation layers followed by a linear
read-out.  Every weight, bias and read-out entry is either a fixed number or
a reference into one flat vector of free parameters; referencing the same
index from several entries expresses weight sharing (convolutions, Toeplitz
layers, tied layers).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .activations import ActivationSpec, get_activation

__all__ = [
    "Fixed",
    "Free",
    "EntrySpec",
    "LayerStructure",
    "Architecture",
    "ParamAssignment",
    "StructureError",
    "DomainError",
    "free_param_count",
    "dense_param_count",
    "evaluate",
    "layer_outputs",
    "forward_batch",
    "uniform_output_bound",
    "materialize",
    "dense_equivalent",
    "localized_net",
    "dense",
    "toeplitz1d",
    "tree",
    "PRESETS",
    "architecture_to_json",
    "architecture_from_json",
    "load_architecture",
    "random_params",
]


class StructureError(ValueError):
    """Malformed architecture; ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Fixed:
    value: float


@dataclass(frozen=True)
class Free:
    index: int


EntrySpec = Union[Fixed, Free]


def _entry_arrays(entries):
    entries = np.asarray(entries, dtype=object)
    idx = np.full(entries.shape, -1, dtype=np.int64)
    val = np.zeros(entries.shape, dtype=float)
    for pos, e in np.ndenumerate(entries):
        if isinstance(e, Free):
            idx[pos] = e.index
        elif isinstance(e, Fixed):
            val[pos] = e.value
        else:
            raise StructureError(f"entry {e!r} is neither Fixed nor Free")
    return idx, val


def _materialize(idx, val, theta):
    # theta: (P, n) -> (P, *idx.shape)
    out = np.broadcast_to(val, (theta.shape[0],) + val.shape).copy()
    mask = idx >= 0
    if mask.any():
        out[:, mask] = theta[:, idx[mask]]
    return out


@dataclass(frozen=True, eq=False)
class LayerStructure:
    d_in: int
    d_out: int
    weights: tuple  # d_out rows of d_in entries
    biases: tuple
    activation: ActivationSpec
    w_index: np.ndarray = field(init=False, repr=False)
    w_fixed: np.ndarray = field(init=False, repr=False)
    b_index: np.ndarray = field(init=False, repr=False)
    b_fixed: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        weights = tuple(tuple(row) for row in self.weights)
        biases = tuple(self.biases)
        if len(weights) != self.d_out or any(len(row) != self.d_in for row in weights):
            raise StructureError(f"weight grid must be {self.d_out}x{self.d_in}")
        if len(biases) != self.d_out:
            raise StructureError(f"bias vector must have length {self.d_out}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)
        object.__setattr__(self, "activation", get_activation(self.activation))
        wi, wv = _entry_arrays(weights)
        bi, bv = _entry_arrays(biases)
        for name, arr in (("w_index", wi), ("w_fixed", wv), ("b_index", bi), ("b_fixed", bv)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def free_w(self) -> int:
        return len(np.unique(self.w_index[self.w_index >= 0]))

    @property
    def free_b(self) -> int:
        return len(np.unique(self.b_index[self.b_index >= 0]))


@dataclass(frozen=True, eq=False)
class Architecture:
    """Layered net ``x -> a . h_L(x)`` with ``h_k = s_k(W_k h_{k-1} + b_k)``.

    All entries, fixed or free, are bounded by ``radius`` in absolute value.
    """

    input_dim: int
    layers: tuple
    output: tuple
    radius: float = 1.0
    a_index: np.ndarray = field(init=False, repr=False)
    a_fixed: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "output", tuple(self.output))
        problems = []
        if self.input_dim < 1:
            problems.append("input_dim must be >= 1")
        if not self.radius >= 1:
            problems.append(f"radius must be >= 1, got {self.radius}")
        if not self.layers:
            problems.append("need at least one layer")
        prev = self.input_dim
        for k, layer in enumerate(self.layers, start=1):
            if layer.d_in != prev:
                problems.append(f"layer {k}: d_in={layer.d_in} does not match previous width {prev}")
            prev = layer.d_out
        if len(self.output) != prev:
            problems.append(f"output vector has length {len(self.output)}, expected {prev}")
        try:
            ai, av = _entry_arrays(self.output)
        except StructureError as exc:
            problems.extend(exc.problems)
            ai, av = np.zeros(0, dtype=np.int64), np.zeros(0)
        ai.setflags(write=False)
        av.setflags(write=False)
        object.__setattr__(self, "a_index", ai)
        object.__setattr__(self, "a_fixed", av)
        for name, fixed in self._fixed_blocks():
            bad = np.abs(fixed) > self.radius
            if bad.any():
                problems.append(f"{name}: fixed value {fixed[bad].flat[0]} outside [-R, R] with R={self.radius}")
        used = set()
        for _, idx in self._index_blocks():
            used.update(int(i) for i in idx[idx >= 0].ravel())
        if used and used != set(range(max(used) + 1)):
            missing = sorted(set(range(max(used) + 1)) - used)
            problems.append(f"free indices not contiguous; missing {missing[:10]}")
        if problems:
            raise StructureError(problems)

    def _index_blocks(self):
        for k, layer in enumerate(self.layers, start=1):
            yield f"layer {k} weights", layer.w_index
            yield f"layer {k} biases", layer.b_index
        yield "output", self.a_index

    def _fixed_blocks(self):
        for k, layer in enumerate(self.layers, start=1):
            yield f"layer {k} weights", layer.w_fixed[layer.w_index < 0]
            yield f"layer {k} biases", layer.b_fixed[layer.b_index < 0]
        yield "output", self.a_fixed[self.a_index < 0]

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def widths(self) -> tuple:
        return (self.input_dim,) + tuple(layer.d_out for layer in self.layers)

    @property
    def free_a(self) -> int:
        return len(np.unique(self.a_index[self.a_index >= 0]))

    @property
    def n_params(self) -> int:
        """Length of the flat parameter vector (distinct free indices)."""
        m = -1
        for _, idx in self._index_blocks():
            if idx.size:
                m = max(m, int(idx.max()))
        return m + 1

    @property
    def n(self) -> int:
        return free_param_count(self)

    @property
    def d_max(self) -> int:
        return max(self.widths)

    def d_prod(self, ell: int) -> int:
        """``d_ell * ... * d_0``."""
        return int(np.prod(self.widths[: ell + 1], dtype=object))

    def params(self, values) -> "ParamAssignment":
        p = ParamAssignment(values)
        self.check_params(p)
        return p

    def check_params(self, params) -> np.ndarray:
        theta = np.asarray(getattr(params, "values", params), dtype=float)
        if theta.shape[-1] != self.n_params:
            raise StructureError(f"expected {self.n_params} parameters, got {theta.shape[-1]}")
        if np.any(np.abs(theta) > self.radius):
            raise StructureError(f"parameter outside [-R, R] with R={self.radius}")
        return theta


@dataclass(frozen=True, eq=False)
class ParamAssignment:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


def free_param_count(arch: Architecture) -> int:
    """Sum of per-block distinct free counts, ``sum_k (F_kw + F_kb) + F_La``."""
    return sum(layer.free_w + layer.free_b for layer in arch.layers) + arch.free_a


def dense_param_count(widths: Sequence[int]) -> int:
    """Free parameters of a fully connected net with widths ``d_0, ..., d_L``."""
    widths = list(widths)
    if len(widths) < 2:
        raise ValueError("need at least one layer: widths must contain d_0 and d_L")
    if any(w < 1 for w in widths):
        raise ValueError("widths must be positive")
    return widths[-1] + sum(widths[k - 1] * widths[k] + widths[k] for k in range(1, len(widths)))


def _as_theta(arch, params):
    theta = np.asarray(getattr(params, "values", params), dtype=float)
    return np.atleast_2d(theta)


def _forward(arch: Architecture, theta: np.ndarray, X: np.ndarray, keep_layers: bool = False):
    """theta (P, n), X (m, d) -> values (P, m) and optionally [h_1..h_L] each (P, m, d_k)."""
    P = theta.shape[0]
    h = np.broadcast_to(X, (P,) + X.shape)
    hidden = []
    for layer in arch.layers:
        W = _materialize(layer.w_index, layer.w_fixed, theta)
        b = _materialize(layer.b_index, layer.b_fixed, theta)
        pre = np.einsum("pmj,pij->pmi", h, W) + b[:, None, :]
        h = layer.activation(pre)
        if keep_layers:
            hidden.append(h)
    a = _materialize(arch.a_index, arch.a_fixed, theta)
    out = np.einsum("pmi,pi->pm", h, a)
    return (out, hidden) if keep_layers else out


def _check_points(arch, x):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[-1] != arch.input_dim:
        raise DomainError(f"points must have dimension {arch.input_dim}")
    if np.any(np.abs(X) > 1.0):
        raise DomainError("points must lie in [-1, 1]^d")
    return X, single


def evaluate(arch: Architecture, params, x):
    """Net value at a point ``x`` (shape ``(d,)``) or points ``(m, d)``."""
    X, single = _check_points(arch, x)
    theta = arch.check_params(params)
    out = _forward(arch, np.atleast_2d(theta), X)[0]
    return float(out[0]) if single else out


def layer_outputs(arch: Architecture, params, x) -> list:
    """Hidden vectors ``h_1, ..., h_L`` at ``x``; each ``(d_k,)`` or ``(m, d_k)``."""
    X, single = _check_points(arch, x)
    theta = arch.check_params(params)
    _, hidden = _forward(arch, np.atleast_2d(theta), X, keep_layers=True)
    return [h[0, 0] if single else h[0] for h in hidden]


def forward_batch(arch: Architecture, thetas, X) -> np.ndarray:
    """Values for many parameter vectors at once: ``(P, n), (m, d) -> (P, m)``.

    No domain or radius checks; callers (quadrature, finite differences)
    may legitimately step slightly outside the cube.
    """
    return _forward(arch, np.atleast_2d(np.asarray(thetas, dtype=float)), np.atleast_2d(np.asarray(X, dtype=float)))


def uniform_output_bound(arch: Architecture, ell: int) -> float:
    """Layer-``ell`` bound ``(c (1 + 2^{d+1}) R)^ell d_{ell-1} ... d_0`` on
    ``max_i ||h_ell^i||_{L1}``, with c the largest growth constant among
    layers ``1..ell``."""
    if not 1 <= ell <= arch.depth:
        raise ValueError(f"layer index must be in 1..{arch.depth}")
    d = arch.input_dim
    c = max(layer.activation.growth_c for layer in arch.layers[:ell])
    return float((c * (1 + 2 ** (d + 1)) * arch.radius) ** ell * arch.d_prod(ell - 1))


def materialize(arch: Architecture, params):
    """Dense ``[(W_1, b_1), ..., (W_L, b_L)], a`` for one parameter vector."""
    theta = np.atleast_2d(arch.check_params(params))
    mats = [
        (_materialize(l.w_index, l.w_fixed, theta)[0], _materialize(l.b_index, l.b_fixed, theta)[0])
        for l in arch.layers
    ]
    return mats, _materialize(arch.a_index, arch.a_fixed, theta)[0]


def dense_equivalent(arch: Architecture, params) -> Architecture:
    """Same function with every shared or free entry frozen to its value."""
    mats, a = materialize(arch, params)
    layers = [
        LayerStructure(
            l.d_in,
            l.d_out,
            [[Fixed(float(w)) for w in row] for row in W],
            [Fixed(float(v)) for v in b],
            l.activation,
        )
        for l, (W, b) in zip(arch.layers, mats)
    ]
    return Architecture(arch.input_dim, layers, [Fixed(float(v)) for v in a], arch.radius)


def random_params(arch: Architecture, size: int | None = None, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    shape = (arch.n_params,) if size is None else (size, arch.n_params)
    return rng.uniform(-arch.radius, arch.radius, shape)


# -- constructions ---------------------------------------------------------


def localized_net(d: int, lower, upper, sharpness: float, activation="logistic"):
    """Two-hidden-layer net with 2d + 1 neurons approximating the indicator
    of the box ``[lower, upper]``.

    Layer one holds ``s(K (x_j - a_j))`` and ``s(K (b_j - x_j))`` for every
    coordinate; layer two fires ``s(K (sum - (2d - 1/2)))``.  Returns the
    architecture (all entries free) and the matching parameter assignment.
    """
    act = get_activation(activation)
    if not act.is_sigmoidal:
        raise ValueError(f"localized approximation needs a sigmoidal activation, got {act.name!r}")
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (d,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (d,))
    if np.any(lower >= upper):
        raise ValueError("box needs lower < upper componentwise")
    if np.any(lower < -1) or np.any(upper > 1):
        raise ValueError("box must lie in [-1, 1]^d")
    if sharpness <= 0:
        raise ValueError("sharpness must be positive")
    K = float(sharpness)

    values = []

    def free(v):
        values.append(float(v))
        return Free(len(values) - 1)

    W1, b1 = [], []
    for j in range(d):
        for sign, edge in ((1.0, lower[j]), (-1.0, upper[j])):
            W1.append([free(sign * K) if i == j else Fixed(0.0) for i in range(d)])
            b1.append(free(-sign * K * edge))
    W2 = [[free(K) for _ in range(2 * d)]]
    b2 = [free(-K * (2 * d - 0.5))]
    a = [Fixed(1.0)]
    R = max(1.0, max(abs(v) for v in values))
    arch = Architecture(
        d,
        [LayerStructure(d, 2 * d, W1, b1, act), LayerStructure(2 * d, 1, W2, b2, act)],
        a,
        radius=R,
    )
    return arch, ParamAssignment(values)


class _Indexer:
    def __init__(self):
        self.next = 0

    def __call__(self):
        self.next += 1
        return Free(self.next - 1)


def dense(widths: Sequence[int], activation="logistic", radius: float = 1.0) -> Architecture:
    """Fully connected net; every entry its own free parameter."""
    widths = list(widths)
    dense_param_count(widths)  # validates
    new = _Indexer()
    layers = []
    for k in range(1, len(widths)):
        W = [[new() for _ in range(widths[k - 1])] for _ in range(widths[k])]
        b = [new() for _ in range(widths[k])]
        layers.append(LayerStructure(widths[k - 1], widths[k], W, b, activation))
    return Architecture(widths[0], layers, [new() for _ in range(widths[-1])], radius)


def toeplitz1d(d: int, kernel_width: int = 3, depth: int = 1, activation="logistic", radius: float = 1.0) -> Architecture:
    """Stack of 1-D 'same' convolutions on ``d`` channels.

    Each layer shares one kernel of ``kernel_width`` weights along the
    diagonals (zero padding outside) and one bias; the read-out is dense.
    """
    if kernel_width < 1 or kernel_width % 2 == 0:
        raise ValueError("kernel_width must be a positive odd integer")
    half = kernel_width // 2
    new = _Indexer()
    layers = []
    for _ in range(depth):
        kernel = [new() for _ in range(kernel_width)]
        bias = new()
        W = [[kernel[j - i + half] if abs(j - i) <= half else Fixed(0.0) for j in range(d)] for i in range(d)]
        layers.append(LayerStructure(d, d, W, [bias] * d, activation))
    return Architecture(d, layers, [new() for _ in range(d)], radius)


def tree(d: int, activation="logistic", radius: float = 1.0) -> Architecture:
    """Binary-tree net: each neuron reads two neighbours of the previous
    layer, halving the width until a single neuron remains."""
    if d < 2:
        raise ValueError("tree preset needs d >= 2")
    new = _Indexer()
    layers = []
    width = d
    while width > 1:
        out = (width + 1) // 2
        W = [[new() if j // 2 == i else Fixed(0.0) for j in range(width)] for i in range(out)]
        layers.append(LayerStructure(width, out, W, [new() for _ in range(out)], activation))
        width = out
    return Architecture(d, layers, [new()], radius)


PRESETS = {"dense": dense, "toeplitz1d": toeplitz1d, "tree": tree}


# -- JSON ------------------------------------------------------------------


def _entry_to_json(e):
    return {"free": e.index} if isinstance(e, Free) else {"fixed": e.value}


def _entry_from_json(obj, where, problems):
    if isinstance(obj, dict) and set(obj) == {"free"} and isinstance(obj["free"], int) and obj["free"] >= 0:
        return Free(obj["free"])
    if isinstance(obj, dict) and set(obj) == {"fixed"} and isinstance(obj["fixed"], (int, float)):
        return Fixed(float(obj["fixed"]))
    problems.append(f"{where}: bad entry {obj!r}")
    return Fixed(0.0)


def architecture_to_json(arch: Architecture) -> dict:
    return {
        "input_dim": arch.input_dim,
        "radius": arch.radius,
        "layers": [
            {
                "d_in": l.d_in,
                "d_out": l.d_out,
                "activation": l.activation.to_json() if l.activation.rule in ("gompertz", "custom-table") else l.activation.name,
                "weights": [[_entry_to_json(e) for e in row] for row in l.weights],
                "biases": [_entry_to_json(e) for e in l.biases],
            }
            for l in arch.layers
        ],
        "output": [_entry_to_json(e) for e in arch.output],
    }


def architecture_from_json(doc: dict) -> Architecture:
    """Build an architecture from its JSON form, collecting every problem
    before raising :class:`StructureError`."""
    problems = []
    if not isinstance(doc, dict):
        raise StructureError("architecture document must be a JSON object")
    for key in ("input_dim", "layers", "output"):
        if key not in doc:
            problems.append(f"missing field {key!r}")
    if problems:
        raise StructureError(problems)
    layers = []
    for k, ldoc in enumerate(doc["layers"], start=1):
        try:
            act = get_activation(ldoc.get("activation", "logistic"))
        except (ValueError, TypeError, KeyError) as exc:
            problems.append(f"layer {k}: {exc}")
            continue
        W = [[_entry_from_json(e, f"layer {k} weights[{i}][{j}]", problems) for j, e in enumerate(row)]
             for i, row in enumerate(ldoc.get("weights", []))]
        b = [_entry_from_json(e, f"layer {k} biases[{i}]", problems) for i, e in enumerate(ldoc.get("biases", []))]
        try:
            layers.append(LayerStructure(ldoc.get("d_in"), ldoc.get("d_out"), W, b, act))
        except (StructureError, TypeError) as exc:
            problems.append(f"layer {k}: {exc}")
    out = [_entry_from_json(e, f"output[{i}]", problems) for i, e in enumerate(doc["output"])]
    if problems:
        raise StructureError(problems)
    return Architecture(int(doc["input_dim"]), layers, out, float(doc.get("radius", 1.0)))


def load_architecture(path) -> Architecture:
    """Read an architecture file; JSON syntax errors report line and column."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict) and "preset" in doc:
        kwargs = {k: v for k, v in doc.items() if k != "preset"}
        if doc["preset"] not in PRESETS:
            raise StructureError(f"unknown preset {doc['preset']!r}")
        return PRESETS[doc["preset"]](**kwargs)
    return architecture_from_json(doc)
