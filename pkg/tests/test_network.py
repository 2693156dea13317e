import numpy as np
import pytest

from conftest import numeric_grad, relative_error
from hydromonitor.errors import NonFiniteError, ShapeMismatchError
from hydromonitor.nn.network import Activation, Layer, LayerSpec, NetworkParams, backward, forward, mlp, polyak
from hydromonitor.nn.optim import AdamState, adam_update


class TestForward:
    def test_vector_and_batch_agree(self, rng):
        net = mlp(4, (6,), 3, rng)
        x = rng.standard_normal((5, 4))
        batch, _ = forward(net, x)
        for row, expected in zip(x, batch):
            single, _ = forward(net, row)
            np.testing.assert_allclose(single, expected)

    def test_width_mismatch(self, rng):
        with pytest.raises(ShapeMismatchError):
            forward(mlp(4, (6,), 3, rng), np.zeros(5))

    def test_layers_must_chain(self):
        a = Layer(np.zeros((3, 2)), np.zeros(3), LayerSpec(in_width=2, out_width=3))
        b = Layer(np.zeros((1, 4)), np.zeros(1), LayerSpec(in_width=4, out_width=1))
        with pytest.raises(ShapeMismatchError):
            NetworkParams(layers=(a, b))

    def test_shape_bookkeeping(self, rng):
        net = mlp(49, (256, 256), 4, rng)
        assert net.widths() == [49, 256, 256, 4]
        assert net.param_count == 49 * 256 + 256 + 256 * 256 + 256 + 256 * 4 + 4
        assert len(net.arrays()) == 6

    def test_final_scale_shrinks_last_layer(self, rng):
        net = mlp(10, (32,), 2, np.random.default_rng(0), final_scale=0.1)
        bound = 0.1 * np.sqrt(3.0 / 32)
        assert np.abs(net.layers[-1].weights).max() <= bound


class TestBackward:
    @pytest.mark.parametrize("hidden", [Activation.TANH, Activation.RELU])
    def test_matches_finite_differences(self, rng, hidden):
        net = mlp(4, (5, 3), 2, rng, hidden_activation=hidden)
        x = rng.standard_normal((3, 4))
        g = rng.standard_normal((3, 2))

        def objective():
            out, _ = forward(net, x)
            return float(np.sum(out * g))

        _, cache = forward(net, x)
        grads = backward(net, cache, g)
        numeric = numeric_grad(objective, net.arrays())
        assert relative_error(grads.arrays(), numeric) < 1e-4

    def test_input_gradient(self, rng):
        net = mlp(4, (5,), 2, rng, hidden_activation=Activation.TANH)
        x = rng.standard_normal((2, 4))
        g = rng.standard_normal((2, 2))
        _, cache = forward(net, x)
        analytic = backward(net, cache, g).input_grad
        numeric = numeric_grad(lambda: float(np.sum(forward(net, x)[0] * g)), [x])
        assert relative_error([analytic], numeric) < 1e-4

    def test_gradient_shape_mismatch(self, rng):
        net = mlp(4, (5,), 2, rng)
        _, cache = forward(net, np.zeros((3, 4)))
        with pytest.raises(ShapeMismatchError):
            backward(net, cache, np.zeros((3, 3)))


class TestPolyak:
    def test_extremes(self, rng):
        target = mlp(3, (4,), 2, rng)
        online = mlp(3, (4,), 2, rng)
        for a, b in zip(polyak(target, online, 0.0).arrays(), target.arrays()):
            np.testing.assert_array_equal(a, b)
        for a, b in zip(polyak(target, online, 1.0).arrays(), online.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_inputs_unchanged(self, rng):
        target = mlp(3, (4,), 2, rng)
        online = mlp(3, (4,), 2, rng)
        before = [a.copy() for a in target.arrays()]
        polyak(target, online, 0.5)
        for a, b in zip(target.arrays(), before):
            np.testing.assert_array_equal(a, b)


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        params = [np.array([1.0, -2.0, 3.0])]
        grads = [np.array([0.5, -4.0, 2.0])]
        state = AdamState.zeros_like(params, lr=0.01)
        new, state = adam_update(params, grads, state)
        np.testing.assert_allclose(new[0], params[0] - 0.01 * np.sign(grads[0]), atol=1e-9)
        assert state.t == 1

    def test_minimizes_quadratic(self):
        target = np.array([0.5, -1.5])
        params = [np.zeros(2)]
        state = AdamState.zeros_like(params, lr=0.05)
        for _ in range(2000):
            params, state = adam_update(params, [2.0 * (params[0] - target)], state)
        np.testing.assert_allclose(params[0], target, atol=1e-2)

    def test_rejects_non_finite_gradients(self):
        params = [np.zeros(2)]
        with pytest.raises(NonFiniteError):
            adam_update(params, [np.array([np.nan, 0.0])], AdamState.zeros_like(params))

    def test_rejects_shape_mismatch(self):
        params = [np.zeros(2)]
        with pytest.raises(ShapeMismatchError):
            adam_update(params, [np.zeros(3)], AdamState.zeros_like(params))
