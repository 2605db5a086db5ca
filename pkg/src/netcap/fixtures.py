"""Small architectures used by the verification suites and the tests."""

from __future__ import annotations

from .network import Architecture, Fixed, Free, LayerStructure, dense


def chain(n_free: int = 5, activation="logistic") -> Architecture:
    """``d = 1``, two hidden layers of width one.

    With ``n_free = 5`` every entry is free; ``n_free = 3`` pins both
    biases to zero.
    """
    if n_free not in (3, 5):
        raise ValueError("chain fixture supports 3 or 5 free parameters")
    if n_free == 5:
        return dense([1, 1, 1], activation)
    l1 = LayerStructure(1, 1, [[Free(0)]], [Fixed(0.0)], activation)
    l2 = LayerStructure(1, 1, [[Free(1)]], [Fixed(0.0)], activation)
    return Architecture(1, [l1, l2], [Free(2)], 1.0)


def plane(activation="logistic") -> Architecture:
    """``d = 2``, one neuron without bias, free read-out; three parameters."""
    l1 = LayerStructure(2, 1, [[Free(0), Free(1)]], [Fixed(0.0)], activation)
    return Architecture(2, [l1], [Free(2)], 1.0)


def shared_pair(activation="logistic") -> Architecture:
    """``d = 1``, width two, both neurons tied to one weight and one bias."""
    l1 = LayerStructure(1, 2, [[Free(0)], [Free(0)]], [Free(1), Free(1)], activation)
    return Architecture(1, [l1], [Free(2), Free(2)], 1.0)


def fixture_set() -> dict:
    """Named fixtures with ``d <= 2`` and ``L <= 3``."""
    return {
        "chain3": chain(3),
        "chain5": chain(5),
        "plane": plane(),
        "shared-pair": shared_pair(),
        "dense-1-2-2-2": dense([1, 2, 2, 2]),
        "dense-2-3-1": dense([2, 3, 1]),
        "dense-2-2-2": dense([2, 2, 2], "tanh-sigmoid"),
    }


def small_fixtures() -> dict:
    """Fixtures with at most three free parameters (enumerable nets)."""
    return {k: a for k, a in fixture_set().items() if a.n_params <= 3}
