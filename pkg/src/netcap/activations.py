"""Activation functions with the Lipschitz / linear-growth constants the
covering bounds consume.

Every activation carries two constants: ``lipschitz_c1`` with
``|s(t) - s(t')| <= c1 |t - t'|`` and ``growth_c`` with
``|s(t)| <= c (|t| + 1)``.  Built-in constants are deliberately loose
(c1 = c = 1) except for the logistic function, whose slope never exceeds 1/4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ActivationSpec",
    "ActivationCheck",
    "BUILTIN_RULES",
    "SIGMOIDAL_RULES",
    "logistic",
    "tanh_sigmoid",
    "arctan_sigmoid",
    "gompertz",
    "relu",
    "gaussian",
    "custom_table",
    "get_activation",
    "certify_activation",
]

BUILTIN_RULES = ("logistic", "tanh-sigmoid", "arctan-sigmoid", "gompertz", "relu", "gaussian", "custom-table")
SIGMOIDAL_RULES = ("logistic", "tanh-sigmoid", "arctan-sigmoid", "gompertz")


def _logistic(t):
    # split by sign so exp never overflows
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True)
class ActivationSpec:
    """A scalar activation together with its certified constants.

    ``params`` holds rule parameters: ``(a, b)`` for gompertz and the knot
    table ``(knots, values)`` for custom-table.  ``sup_bound`` is an
    optional bound on ``sup |s|`` (None when the activation is unbounded);
    it only sharpens the parameter-sensitivity estimates of explicit nets.
    """

    name: str
    rule: str
    lipschitz_c1: float
    growth_c: float
    params: tuple = ()
    sup_bound: float | None = None
    _fn: Callable = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.rule not in BUILTIN_RULES:
            raise ValueError(f"unknown activation rule {self.rule!r}")
        if not self.lipschitz_c1 > 0:
            raise ValueError("lipschitz_c1 must be positive")
        if not self.growth_c >= 1:
            raise ValueError("growth_c must be >= 1")

    def __call__(self, t):
        return self._fn(np.asarray(t, dtype=float))

    @property
    def is_sigmoidal(self) -> bool:
        return self.rule in SIGMOIDAL_RULES

    def to_json(self):
        out = {"name": self.name, "rule": self.rule}
        if self.rule == "gompertz":
            out["a"], out["b"] = self.params
        elif self.rule == "custom-table":
            out["knots"] = list(self.params[0])
            out["values"] = list(self.params[1])
        return out


def logistic() -> ActivationSpec:
    return ActivationSpec("logistic", "logistic", 0.25, 1.0, sup_bound=1.0, _fn=_logistic)


def tanh_sigmoid() -> ActivationSpec:
    return ActivationSpec(
        "tanh-sigmoid", "tanh-sigmoid", 1.0, 1.0, sup_bound=1.0, _fn=lambda t: 0.5 * (np.tanh(t) + 1.0)
    )


def arctan_sigmoid() -> ActivationSpec:
    return ActivationSpec(
        "arctan-sigmoid",
        "arctan-sigmoid",
        1.0,
        1.0,
        sup_bound=1.0,
        _fn=lambda t: np.arctan(t) / np.pi + 0.5,
    )


def gompertz(a: float = 1.0, b: float = 1.0) -> ActivationSpec:
    """Gompertz sigmoid ``exp(-a exp(-b t))``; its slope is at most b/e."""
    if a <= 0 or b <= 0:
        raise ValueError("gompertz needs a, b > 0")

    def fn(t):
        # exp(-b t) overflows for very negative t, where the value is 0 anyway
        with np.errstate(over="ignore"):
            return np.exp(-a * np.exp(-b * t))

    return ActivationSpec(
        "gompertz", "gompertz", max(1.0, b / np.e), 1.0, params=(float(a), float(b)), sup_bound=1.0, _fn=fn
    )


def relu() -> ActivationSpec:
    return ActivationSpec("relu", "relu", 1.0, 1.0, _fn=lambda t: np.maximum(t, 0.0))


def gaussian() -> ActivationSpec:
    return ActivationSpec("gaussian", "gaussian", 1.0, 1.0, sup_bound=1.0, _fn=lambda t: np.exp(-t * t))


def custom_table(knots, values, name: str = "custom") -> ActivationSpec:
    """Piecewise-linear activation through ``(knots, values)``, constant
    beyond the outer knots.  Constants are read off the table: c1 is the
    steepest segment slope, c the largest ``|s(t)| / (|t| + 1)``.
    """
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    if knots.ndim != 1 or knots.shape != values.shape or knots.size < 2:
        raise ValueError("custom table needs matching 1-d knots/values with >= 2 entries")
    if np.any(np.diff(knots) <= 0):
        raise ValueError("knots must be strictly increasing")
    slopes = np.abs(np.diff(values) / np.diff(knots))
    c1 = max(float(slopes.max()), 1e-12)
    # |s| / (|t| + 1) is monotone on each piece where t keeps its sign, so
    # the maximum sits at a knot or at t = 0
    ts = np.append(knots, 0.0)
    growth = max(1.0, float(np.max(np.abs(np.interp(ts, knots, values)) / (np.abs(ts) + 1.0))))
    return ActivationSpec(
        name,
        "custom-table",
        c1,
        growth,
        params=(tuple(knots.tolist()), tuple(values.tolist())),
        sup_bound=float(np.abs(values).max()),
        _fn=lambda t: np.interp(t, knots, values),
    )


_FACTORIES = {
    "logistic": logistic,
    "tanh-sigmoid": tanh_sigmoid,
    "arctan-sigmoid": arctan_sigmoid,
    "gompertz": gompertz,
    "relu": relu,
    "gaussian": gaussian,
}


def get_activation(spec) -> ActivationSpec:
    """Resolve a name, a JSON dict, or an existing spec into an ActivationSpec."""
    if isinstance(spec, ActivationSpec):
        return spec
    if isinstance(spec, str):
        if spec not in _FACTORIES:
            raise ValueError(f"unknown activation {spec!r}")
        return _FACTORIES[spec]()
    if isinstance(spec, dict):
        rule = spec.get("rule", spec.get("name"))
        if rule == "gompertz":
            return gompertz(spec.get("a", 1.0), spec.get("b", 1.0))
        if rule == "custom-table":
            return custom_table(spec["knots"], spec["values"], name=spec.get("name", "custom"))
        return get_activation(rule)
    raise TypeError(f"cannot interpret {spec!r} as an activation")


@dataclass
class ActivationCheck:
    name: str
    max_lipschitz_ratio: float
    max_growth_ratio: float
    lipschitz_ok: bool
    growth_ok: bool

    @property
    def passed(self) -> bool:
        return self.lipschitz_ok and self.growth_ok


def certify_activation(act: ActivationSpec, n_pairs: int = 10_000, T: float = 1e3, seed: int = 0) -> ActivationCheck:
    """Sampled check of both activation constants on ``[-T, T]``.

    Pairs are drawn half globally and half at short range, since the
    Lipschitz ratio only approaches c1 for nearby points.
    """
    rng = np.random.default_rng(seed)
    t = rng.uniform(-T, T, n_pairs)
    near = rng.uniform(-10, 10, n_pairs // 2)
    t = np.concatenate([t, near])
    dt = np.concatenate([rng.uniform(-T, T, n_pairs), rng.normal(scale=1e-2, size=n_pairs // 2)])
    t2 = np.clip(t + dt, -T, T)
    keep = t2 != t
    t, t2 = t[keep], t2[keep]
    lip = np.abs(act(t) - act(t2)) / np.abs(t - t2)
    grow = np.abs(act(t)) / (np.abs(t) + 1.0)
    # 1e-9 absorbs rounding in the difference quotient
    return ActivationCheck(
        act.name,
        float(lip.max()),
        float(grow.max()),
        bool(lip.max() <= act.lipschitz_c1 * (1 + 1e-9)),
        bool(grow.max() <= act.growth_c * (1 + 1e-9)),
    )
