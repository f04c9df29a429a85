"""
Tests for the dense numerical kernel: matmul, dense layers, LSTM cell and
the finite-difference checker they are verified with.
"""
import numpy as np
import pytest

from core.exceptions import DimensionError, NumericalError
from core.gradcheck import check_param_gradients, finite_diff_check
from core.kernels import (
    dense_backward,
    dense_forward,
    init_dense,
    init_lstm,
    lstm_cell_backward,
    lstm_cell_forward,
    matmul,
)
from core.rng import RngState, make_rng

SEEDS = range(10)


def signed_bounded(rng, shape, low=0.5, high=1.5):
    """Random entries with magnitude in [low, high] and random sign."""
    return rng.uniform(low, high, size=shape) * rng.choice([-1.0, 1.0], size=shape)


class TestMatmul:

    def test_identity(self):
        m = np.arange(6, dtype=float).reshape(3, 2)
        np.testing.assert_array_equal(matmul(np.eye(3), m), m)

    def test_hand_evaluated_product(self):
        result = matmul([[1, 2], [3, 4]], [[0], [1]])
        np.testing.assert_array_equal(result, [[2.0], [4.0]])

    def test_zero_matrix(self):
        m = np.arange(6, dtype=float).reshape(2, 3)
        np.testing.assert_array_equal(matmul(np.zeros((4, 2)), m), np.zeros((4, 3)))

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(DimensionError) as exc:
            matmul(np.zeros((2, 3)), np.zeros((2, 3)))
        assert '(2, 3) x (2, 3)' in str(exc.value)


class TestDenseLayer:

    def test_zero_sigmoid_layer_outputs_half(self):
        params = {'W': np.zeros((4, 3)), 'b': np.zeros(4)}
        y, _ = dense_forward(params, np.ones((2, 3)), 'sigmoid')
        np.testing.assert_array_equal(y, np.full((2, 4), 0.5))

    def test_identity_weights_pass_input_through(self):
        x = np.array([[1.0, -2.0, 3.0]])
        y, _ = dense_forward({'W': np.eye(3), 'b': np.zeros(3)}, x, 'identity')
        np.testing.assert_array_equal(y, x)

    def test_tanh_hand_value(self):
        y, _ = dense_forward({'W': np.array([[1.0]]), 'b': np.array([0.0])}, np.array([2.0]), 'tanh')
        assert y[0, 0] == pytest.approx(0.9640, abs=1e-4)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            dense_forward({'W': np.zeros((2, 3)), 'b': np.zeros(2)}, np.zeros((1, 4)))

    def test_unknown_activation(self):
        with pytest.raises(ValueError):
            dense_forward({'W': np.zeros((2, 3)), 'b': np.zeros(2)}, np.zeros((1, 3)), 'softplus')

    def test_zero_upstream_gives_zero_gradients(self):
        rng = make_rng(0)
        params = init_dense(4, 3, rng)
        _, cache = dense_forward(params, rng.normal(size=(2, 4)), 'tanh')
        grads = dense_backward(cache, np.zeros((2, 3)))
        assert not grads.dW.any() and not grads.db.any() and not grads.dx.any()

    def test_linear_layer_input_gradient(self):
        x = np.array([[0.3, -0.7, 1.1]])
        _, cache = dense_forward({'W': np.eye(3), 'b': np.zeros(3)}, x, 'identity')
        upstream = np.array([[1.0, 2.0, -3.0]])
        grads = dense_backward(cache, upstream)
        np.testing.assert_array_equal(grads.dx, upstream @ np.eye(3))

    def test_upstream_shape_mismatch(self):
        _, cache = dense_forward({'W': np.zeros((2, 3)), 'b': np.zeros(2)}, np.zeros((1, 3)))
        with pytest.raises(DimensionError):
            dense_backward(cache, np.zeros((1, 3)))

    @pytest.mark.parametrize('activation', ['sigmoid', 'tanh', 'identity', 'relu'])
    @pytest.mark.parametrize('seed', SEEDS)
    def test_backward_matches_finite_differences(self, seed, activation):
        """Random 3x4 layer: parameter and input gradients agree with central differences."""
        rng = make_rng(seed)
        params = {'W': signed_bounded(rng, (3, 4)), 'b': signed_bounded(rng, 3)}
        x = signed_bounded(rng, (2, 4))
        upstream = signed_bounded(rng, (2, 3))

        def loss_of_params(p):
            y, _ = dense_forward(p, x, activation)
            return float(np.sum(upstream * y))

        _, cache = dense_forward(params, x, activation)
        grads = dense_backward(cache, upstream)
        assert check_param_gradients(loss_of_params, params, {'W': grads.dW, 'b': grads.db}) < 1e-6

        error = finite_diff_check(
            lambda v: float(np.sum(upstream * dense_forward(params, v, activation)[0])),
            x,
            grads.dx,
        )
        assert error < 1e-6


class TestLstmCell:

    def test_zero_parameters_hand_values(self):
        """All-zero parameters give gates 0.5 and candidate 0."""
        params = {'W': np.zeros((8, 5)), 'b': np.zeros(8)}
        c_prev = np.array([[0.4, -1.0]])
        h_t, c_t, cache = lstm_cell_forward(params, np.ones((1, 3)), np.zeros((1, 2)), c_prev)
        np.testing.assert_array_equal(cache.i, np.full((1, 2), 0.5))
        np.testing.assert_array_equal(cache.g, np.zeros((1, 2)))
        np.testing.assert_allclose(c_t, 0.5 * c_prev)
        np.testing.assert_allclose(h_t, 0.5 * np.tanh(0.5 * c_prev))

    def test_empty_history_convention(self):
        """Starting from h_0 = c_0 = 0 with zero parameters keeps the state at zero."""
        params = {'W': np.zeros((8, 5)), 'b': np.zeros(8)}
        h_t, c_t, _ = lstm_cell_forward(params, np.ones((1, 3)), np.zeros((1, 2)), np.zeros((1, 2)))
        assert not h_t.any() and not c_t.any()

    def test_shape_mismatch(self):
        params = {'W': np.zeros((8, 5)), 'b': np.zeros(8)}
        with pytest.raises(DimensionError):
            lstm_cell_forward(params, np.ones((1, 4)), np.zeros((1, 2)), np.zeros((1, 2)))

    @pytest.mark.parametrize('seed', SEEDS)
    def test_backward_matches_finite_differences(self, seed):
        rng = make_rng(seed)
        input_size, hidden = 3, 4
        params = init_lstm(input_size, hidden, rng)
        params['b'] = signed_bounded(rng, 4 * hidden, 0.1, 0.5)
        x = signed_bounded(rng, (1, input_size))
        h_prev = signed_bounded(rng, (1, hidden), 0.2, 0.9)
        c_prev = signed_bounded(rng, (1, hidden))
        dh = signed_bounded(rng, (1, hidden))
        dc = signed_bounded(rng, (1, hidden))

        def loss(p, x_=x, h_=h_prev, c_=c_prev):
            h_t, c_t, _ = lstm_cell_forward(p, x_, h_, c_)
            return float(np.sum(dh * h_t) + np.sum(dc * c_t))

        _, _, cache = lstm_cell_forward(params, x, h_prev, c_prev)
        grads = lstm_cell_backward(cache, dh, dc)

        assert check_param_gradients(loss, params, {'W': grads.dW, 'b': grads.db}) < 1e-5
        assert finite_diff_check(lambda v: loss(params, x_=v), x, grads.dx) < 1e-5
        assert finite_diff_check(lambda v: loss(params, h_=v), h_prev, grads.dh_prev) < 1e-5
        assert finite_diff_check(lambda v: loss(params, c_=v), c_prev, grads.dc_prev) < 1e-5


class TestFiniteDiffCheck:

    def test_square_function(self):
        error = finite_diff_check(lambda v: float(v[0] ** 2), np.array([3.0]), np.array([6.0]), 1e-5)
        assert error < 1e-8

    def test_constant_function(self):
        error = finite_diff_check(lambda v: 4.2, np.array([1.0, 2.0]), np.zeros(2))
        assert error == 0.0

    def test_wrong_gradient_is_reported(self):
        """Twice the true gradient gives relative error |2g - g| / |2g| = 0.5."""
        error = finite_diff_check(lambda v: float(v[0] ** 2), np.array([3.0]), np.array([12.0]))
        assert error == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize('epsilon', [0.0, -1e-5, 0.1])
    def test_epsilon_out_of_range(self, epsilon):
        with pytest.raises(ValueError):
            finite_diff_check(lambda v: float(v[0]), np.array([1.0]), np.array([1.0]), epsilon)

    def test_non_finite_function(self):
        with pytest.raises(NumericalError):
            finite_diff_check(lambda v: float('nan'), np.array([1.0]), np.array([0.0]))


class TestRngState:

    def test_equal_state_gives_identical_draws(self):
        a = RngState(42, (4, 7)).generator().normal(size=(5, 3))
        b = RngState(42, (4, 7)).generator().normal(size=(5, 3))
        assert np.array_equal(a, b)

    def test_child_streams_differ(self):
        base = RngState(42)
        a = base.child(1).generator().random(4)
        b = base.child(2).generator().random(4)
        assert not np.array_equal(a, b)

    def test_initialization_is_deterministic(self):
        assert np.array_equal(init_dense(5, 4, make_rng(3))['W'], init_dense(5, 4, make_rng(3))['W'])

    def test_seed_range(self):
        with pytest.raises(ValueError):
            RngState(-1)
