import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcap.network import (
    Architecture,
    DomainError,
    Fixed,
    Free,
    LayerStructure,
    StructureError,
    architecture_from_json,
    architecture_to_json,
    dense,
    dense_equivalent,
    dense_param_count,
    evaluate,
    forward_batch,
    free_param_count,
    layer_outputs,
    load_architecture,
    localized_net,
    random_params,
    toeplitz1d,
    tree,
    uniform_output_bound,
)


def _reference(widths, theta, x):
    """Plain loop forward pass of a dense logistic net."""
    pos = 0
    h = np.asarray(x, dtype=float)
    for k in range(1, len(widths)):
        W = np.array(theta[pos:pos + widths[k] * widths[k - 1]]).reshape(widths[k], widths[k - 1])
        pos += W.size
        b = np.array(theta[pos:pos + widths[k]])
        pos += widths[k]
        h = 1 / (1 + np.exp(-(W @ h + b)))
    return float(np.dot(theta[pos:pos + widths[-1]], h))


class TestCounting:
    def test_dense_2_3_1(self):
        arch = dense([2, 3, 1])
        assert free_param_count(arch) == 14
        assert dense_param_count([2, 3, 1]) == 14

    def test_toeplitz_shares_kernel(self):
        arch = toeplitz1d(5, kernel_width=3)
        assert arch.layers[0].free_w == 3
        assert arch.n_params == 3 + 1 + 5

    def test_tree(self):
        arch = tree(4)
        assert arch.widths == (4, 2, 1)

    def test_dense_needs_two_widths(self):
        with pytest.raises(ValueError):
            dense_param_count([3])


class TestValidation:
    def test_chaining(self):
        l1 = LayerStructure(1, 2, [[Free(0)], [Free(1)]], [Fixed(0), Fixed(0)], "logistic")
        l2 = LayerStructure(3, 1, [[Free(2)] * 3], [Fixed(0)], "logistic")
        with pytest.raises(StructureError):
            Architecture(1, [l1, l2], [Free(3)])

    def test_fixed_outside_radius_and_gap(self):
        l1 = LayerStructure(1, 1, [[Fixed(2.0)]], [Free(1)], "logistic")
        with pytest.raises(StructureError) as exc:
            Architecture(1, [l1], [Free(2)], radius=1.0)
        assert len(exc.value.problems) == 2

    def test_radius_below_one(self):
        with pytest.raises(StructureError):
            dense([1, 1], radius=0.5)

    def test_params_outside_radius(self):
        arch = dense([1, 1])
        with pytest.raises(ValueError):
            evaluate(arch, [2.0, 0.0, 0.0], [0.0])

    def test_point_outside_cube(self):
        arch = dense([1, 1])
        with pytest.raises(DomainError):
            evaluate(arch, [0.0, 0.0, 0.0], [1.5])


class TestEvaluation:
    def test_matches_reference(self, rng):
        widths = [2, 3, 2]
        arch = dense(widths)
        for _ in range(5):
            theta = random_params(arch, rng=rng)
            x = rng.uniform(-1, 1, 2)
            assert evaluate(arch, theta, x) == pytest.approx(_reference(widths, theta, x), rel=1e-12)

    def test_layer_outputs_shapes(self, rng):
        arch = dense([2, 3, 2])
        hs = layer_outputs(arch, random_params(arch, rng=rng), np.zeros((4, 2)))
        assert [h.shape for h in hs] == [(4, 3), (4, 2)]

    def test_dense_equivalent_same_function(self, rng):
        arch = toeplitz1d(4, depth=2)
        theta = random_params(arch, rng=rng)
        X = rng.uniform(-1, 1, (20, 4))
        frozen = dense_equivalent(arch, theta)
        assert frozen.n_params == 0
        np.testing.assert_allclose(forward_batch(frozen, np.zeros((1, 0)), X)[0], forward_batch(arch, theta, X)[0])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 2), st.lists(st.integers(1, 3), min_size=1, max_size=3), st.integers(0, 1000))
    def test_pointwise_bound(self, d, hidden, seed):
        # |h_l^i(x)| <= c (R d_{l-1} sup|h_{l-1}| + R + 1) recursively; checks the L1 bound pointwise times 2^d
        arch = dense([d] + hidden)
        rng = np.random.default_rng(seed)
        theta = random_params(arch, rng=rng)
        X = rng.uniform(-1, 1, (50, d))
        hs = layer_outputs(arch, theta, X)
        for ell, h in enumerate(hs, start=1):
            l1_upper = np.abs(h).max() * 2**d
            assert l1_upper <= uniform_output_bound(arch, ell)


class TestJson:
    def test_roundtrip(self, tmp_path):
        arch = toeplitz1d(4)
        path = tmp_path / "a.json"
        path.write_text(json.dumps(architecture_to_json(arch)))
        again = load_architecture(path)
        assert again.n_params == arch.n_params
        np.testing.assert_array_equal(again.layers[0].w_index, arch.layers[0].w_index)

    def test_syntax_error_location(self, tmp_path):
        path = tmp_path / "a.json"
        path.write_text('{"input_dim": 1,\n "layers": [}')
        with pytest.raises(StructureError, match="line 2"):
            load_architecture(path)

    def test_lists_every_problem(self):
        doc = architecture_to_json(dense([1, 1]))
        doc["layers"][0]["weights"][0][0] = {"free": -1}
        doc["output"][0] = {"bogus": 1}
        with pytest.raises(StructureError) as exc:
            architecture_from_json(doc)
        assert len(exc.value.problems) == 2

    def test_preset(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"preset": "dense", "widths": [2, 3, 1]}))
        assert load_architecture(path).n == 14


class TestLocalized:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_indicator(self, d, rng):
        arch, params = localized_net(d, -0.5, 0.5, 1e3)
        assert arch.widths == (d, 2 * d, 1)
        X = rng.uniform(-1, 1, (2000, d))
        far = np.min(np.abs(np.abs(X) - 0.5), axis=1) > 0.05
        inside = np.all(np.abs(X) < 0.5, axis=1)
        err = np.abs(evaluate(arch, params, X[far]) - inside[far])
        assert err.max() < 0.01

    def test_rejects_relu(self):
        with pytest.raises(ValueError, match="sigmoidal"):
            localized_net(1, -0.5, 0.5, 10.0, "relu")
