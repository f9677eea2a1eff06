import numpy as np
import pytest

from src.mgpll.errors import BatchNormError, ConfigError, NonFiniteError, ShapeError, StaleTapeError
from src.mgpll.numkit import (
    Activation,
    Direction,
    LayerSpec,
    MlpState,
    Mode,
    chain_specs,
    check_state_gradients,
    clip_parameters,
    cross_entropy,
    cross_entropy_grad,
    mlp_backward,
    mlp_forward,
    mse,
    mse_grad,
    numerical_gradient,
    relative_error,
    rmsprop_step,
)
from src.mgpll.numkit.losses import LOG_FLOOR

GRAD_TOL = 1e-4


def _net(dims, output, bn=frozenset(), seed=0):
    specs = chain_specs(dims, output_activation=output, batch_norm_layers=bn)
    return MlpState.initialize(specs, np.random.default_rng(seed))


def test_identity_layer_is_affine():
    state = _net([2, 3], Activation.IDENTITY)
    state.layers[0].weight[:] = [[1.0, 2.0, 0.0], [0.0, -1.0, 3.0]]
    state.layers[0].bias[:] = [0.5, 0.0, -0.5]
    out, _ = mlp_forward(state, [[1.0, 1.0]])
    np.testing.assert_allclose(out, [[1.5, 1.0, 2.5]])


def test_softmax_of_zero_logits_is_uniform():
    state = _net([4, 3], Activation.SOFTMAX)
    state.layers[0].weight[:] = 0.0
    out, _ = mlp_forward(state, np.ones((2, 4)))
    np.testing.assert_allclose(out, np.full((2, 3), 1.0 / 3.0))


def test_softmax_ignores_a_per_row_logit_shift():
    state = _net([3, 3], Activation.SOFTMAX)
    state.layers[0].weight[:] = np.eye(3)
    logits = np.random.default_rng(2).normal(size=(4, 3))
    shift = np.array([[-50.0], [0.0], [3.5], [200.0]])
    out, _ = mlp_forward(state, logits)
    shifted, _ = mlp_forward(state, logits + shift)
    np.testing.assert_allclose(shifted, out, atol=1e-12)


def test_forward_matches_straight_line_computation():
    state = _net([3, 5, 2], Activation.TANH, bn=frozenset({0}), seed=4)
    layer0, layer1 = state.layers
    layer0.running_mean[:] = np.linspace(-0.2, 0.2, 5)
    layer0.running_var[:] = np.linspace(0.5, 1.5, 5)
    layer0.gamma[:] = 1.3
    layer0.beta[:] = -0.1
    x = np.random.default_rng(1).uniform(-1, 1, size=(6, 3))

    z = x @ layer0.weight + layer0.bias
    u = layer0.gamma * (z - layer0.running_mean) / np.sqrt(layer0.running_var + 1e-5) + layer0.beta
    h = np.where(u > 0, u, 0.01 * u)
    expected = np.tanh(h @ layer1.weight + layer1.bias)

    out, _ = mlp_forward(state, x, Mode.EVAL)
    np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-12)


def test_eval_mode_does_not_touch_running_statistics():
    state = _net([3, 4, 1], Activation.IDENTITY, bn=frozenset({0}))
    before = {k: v.copy() for k, v in state.buffers().items()}
    mlp_forward(state, np.ones((5, 3)), Mode.EVAL)
    for name, value in state.buffers().items():
        np.testing.assert_array_equal(value, before[name])

    mlp_forward(state, np.random.default_rng(0).normal(size=(5, 3)), Mode.TRAIN)
    assert not np.array_equal(state.buffers()["0.running_mean"], before["0.running_mean"])


@pytest.mark.parametrize("output,bn", [
    (Activation.SOFTMAX, frozenset({1})),
    (Activation.SIGMOID, frozenset()),
    (Activation.TANH, frozenset({0, 1})),
    (Activation.IDENTITY, frozenset()),
])
def test_parameter_gradients_match_finite_differences(output, bn):
    state = _net([3, 5, 4, 3], output, bn=bn, seed=2)
    rng = np.random.default_rng(5)
    x = rng.uniform(-1, 1, size=(6, 3))
    if output == Activation.SOFTMAX:
        target = np.eye(3)[rng.integers(0, 3, size=6)]

        def loss():
            return cross_entropy(mlp_forward(state, x)[0], target)

        out, tape = mlp_forward(state, x)
        grads, _ = mlp_backward(state, tape, cross_entropy_grad(out, target))
    else:
        target = rng.uniform(-1, 1, size=(6, 3))

        def loss():
            return mse(mlp_forward(state, x)[0], target)

        out, tape = mlp_forward(state, x)
        grads, _ = mlp_backward(state, tape, 2.0 * (out - target) / out.size)

    errors = check_state_gradients(state, grads, loss)
    assert set(errors) == set(state.parameters())
    assert max(errors.values()) < GRAD_TOL, errors


def test_linear_layer_mse_gradient_closed_form():
    state = _net([3, 2], Activation.IDENTITY, seed=6)
    rng = np.random.default_rng(7)
    x = rng.normal(size=(5, 3))
    target = rng.normal(size=(5, 2))
    out, tape = mlp_forward(state, x)
    grads, _ = mlp_backward(state, tape, mse_grad(out, target))

    # mse averages over all batch * out_dim entries
    residual = 2.0 * (out - target) / out.size
    np.testing.assert_allclose(grads["0.weight"], x.T @ residual, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(grads["0.bias"], residual.sum(axis=0), rtol=1e-12, atol=1e-15)


def test_zero_output_gradient_gives_zero_gradients():
    state = _net([3, 6, 2], Activation.TANH, bn=frozenset({0}), seed=8)
    x = np.random.default_rng(9).normal(size=(4, 3))
    out, tape = mlp_forward(state, x)
    grads, input_grad = mlp_backward(state, tape, np.zeros_like(out))
    assert set(grads) == set(state.parameters())
    for grad in grads.values():
        np.testing.assert_array_equal(grad, 0.0)
    np.testing.assert_array_equal(input_grad, 0.0)


def test_input_gradient_matches_finite_differences():
    state = _net([3, 4, 2], Activation.SIGMOID, seed=8)
    x = np.random.default_rng(2).uniform(-1, 1, size=(3, 3))
    target = np.full((3, 2), 0.3)

    out, tape = mlp_forward(state, x)
    _, dx = mlp_backward(state, tape, 2.0 * (out - target) / out.size)
    numeric = numerical_gradient(lambda: mse(mlp_forward(state, x)[0], target), x)
    assert relative_error(dx, numeric) < GRAD_TOL


def test_backward_rejects_stale_tape():
    state = _net([2, 3, 1], Activation.IDENTITY)
    out, tape = mlp_forward(state, np.ones((2, 2)))
    grads, _ = mlp_backward(state, tape, np.ones_like(out))
    rmsprop_step(state, grads, lr=0.1)
    with pytest.raises(StaleTapeError):
        mlp_backward(state, tape, np.ones_like(out))


def test_batch_norm_needs_two_rows_in_train_mode():
    state = _net([2, 3, 1], Activation.IDENTITY, bn=frozenset({0}))
    with pytest.raises(BatchNormError):
        mlp_forward(state, np.ones((1, 2)), Mode.TRAIN)
    out, _ = mlp_forward(state, np.ones((1, 2)), Mode.EVAL)
    assert out.shape == (1, 1)


def test_forward_validates_input():
    state = _net([2, 3, 1], Activation.IDENTITY)
    with pytest.raises(ShapeError):
        mlp_forward(state, np.ones((2, 3)))
    with pytest.raises(NonFiniteError):
        mlp_forward(state, [[np.nan, 0.0]])


def test_softmax_only_on_last_layer():
    specs = [
        LayerSpec(2, 3, Activation.SOFTMAX),
        LayerSpec(3, 1, Activation.IDENTITY),
    ]
    with pytest.raises(ConfigError):
        MlpState.initialize(specs, np.random.default_rng(0))


def test_rmsprop_first_step_values():
    state = _net([1, 1], Activation.IDENTITY)
    state.layers[0].weight[:] = 1.0
    grads = {"0.weight": np.array([[2.0]]), "0.bias": np.array([0.0])}
    rmsprop_step(state, grads, lr=0.01, decay=0.9, eps_div=1e-8)

    np.testing.assert_allclose(state.accumulators["0.weight"], [[0.4]])
    np.testing.assert_allclose(state.layers[0].weight, [[1.0 - 0.01 * 2.0 / np.sqrt(0.4 + 1e-8)]])
    np.testing.assert_array_equal(state.layers[0].bias, [0.0])


def test_rmsprop_ascent_moves_against_descent():
    down = _net([1, 1], Activation.IDENTITY)
    up = down.copy()
    grads = {"0.weight": np.array([[1.0]])}
    start = float(down.layers[0].weight[0, 0])
    rmsprop_step(down, grads, lr=0.1)
    rmsprop_step(up, grads, lr=0.1, direction=Direction.ASCENT)
    assert down.layers[0].weight[0, 0] < start < up.layers[0].weight[0, 0]
    assert down.layers[0].weight[0, 0] - start == pytest.approx(start - up.layers[0].weight[0, 0])


def test_rmsprop_rejects_bad_settings():
    state = _net([1, 1], Activation.IDENTITY)
    grads = {"0.weight": np.array([[1.0]])}
    with pytest.raises(ConfigError):
        rmsprop_step(state, grads, lr=0.0)
    with pytest.raises(ConfigError):
        rmsprop_step(state, grads, lr=0.1, decay=1.0)
    with pytest.raises(NonFiniteError):
        rmsprop_step(state, {"0.weight": np.array([[np.inf]])}, lr=0.1)
    with pytest.raises(ShapeError):
        rmsprop_step(state, {"0.weight": np.ones((2, 2))}, lr=0.1)


def test_clip_bounds_parameters_not_buffers():
    state = _net([3, 8, 1], Activation.IDENTITY, bn=frozenset({0}), seed=3)
    state.layers[0].running_var[:] = 5.0
    state.layers[0].gamma[:] = 2.0
    clip_parameters(state, 0.01)
    assert state.max_abs_parameter() <= 0.01
    np.testing.assert_array_equal(state.layers[0].running_var, 5.0)
    with pytest.raises(ConfigError):
        clip_parameters(state, 0.0)


def test_clip_is_idempotent():
    state = _net([3, 8, 1], Activation.IDENTITY, bn=frozenset({0}), seed=5)
    for param in state.parameters().values():
        param *= 10.0
    clip_parameters(state, 0.05)
    once = state.copy()
    clip_parameters(state, 0.05)
    assert state.equals(once)


def test_cross_entropy_floors_the_log():
    prob = np.array([[0.0, 1.0]])
    onehot = np.array([[1.0, 0.0]])
    assert cross_entropy(prob, onehot) == pytest.approx(-np.log(LOG_FLOOR))
    np.testing.assert_array_equal(cross_entropy_grad(prob, onehot), [[0.0, 0.0]])


def test_cross_entropy_requires_simplex_and_one_hot():
    with pytest.raises(ShapeError):
        cross_entropy([[0.5, 0.6]], [[1.0, 0.0]])
    with pytest.raises(ShapeError):
        cross_entropy([[0.5, 0.5]], [[1.0, 1.0]])


def test_copy_and_equals():
    state = _net([2, 3, 1], Activation.IDENTITY, bn=frozenset({0}))
    clone = state.copy()
    assert clone.equals(state)
    clone.layers[1].bias[0] += 1.0
    assert not clone.equals(state)
