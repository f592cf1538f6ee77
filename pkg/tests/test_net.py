import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poropinn import net, pde
from poropinn.errors import DimensionError, InputError, NumericError
from poropinn.fdcheck import batch_gradient_oracle, gradient_check, network_derivative_errors
from poropinn.training import batch_objective

from conftest import zero_net


def loop_forward(params, point):
    """Independent scalar-loop evaluation of the layer recurrence."""
    h = [float(v) for v in point]
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = [sum(w[r][c] * h[c] for c in range(len(h))) + b[r] for r in range(len(b))]
        h = a if i == last else [math.tanh(v) for v in a]
    return np.array(h)


# -- init_params ------------------------------------------------------------------


def test_init_is_deterministic(spec):
    a, b = net.init_params(spec, 42), net.init_params(spec, 42)
    for (_, x), (_, y) in zip(a.blocks(), b.blocks()):
        assert np.array_equal(x, y)


def test_init_biases_zero(spec):
    assert all(np.all(b == 0.0) for b in net.init_params(spec, 7).biases)


def test_init_glorot_bound():
    spec = net.LayerSpec(3, 1, 4, 3)
    p = net.init_params(spec, 3)
    for w in p.weights:
        fan_out, fan_in = w.shape
        assert np.max(np.abs(w)) <= math.sqrt(6.0 / (fan_in + fan_out))
    assert len(p.weights) == len(p.biases) == spec.hidden_layers + 1


def test_different_seeds_differ(spec):
    assert not np.array_equal(net.init_params(spec, 1).flat(), net.init_params(spec, 2).flat())


@pytest.mark.parametrize("kwargs", [dict(hidden_units=0), dict(input_dim=0), dict(hidden_layers=-1),
                                    dict(hidden_activation="relu")])
def test_invalid_spec(kwargs):
    with pytest.raises(DimensionError):
        net.LayerSpec(**kwargs)


def test_mismatched_blocks_rejected(spec):
    p = net.init_params(spec, 0)
    with pytest.raises(DimensionError):
        net.MlpParams(spec, p.weights[:-1], p.biases[:-1])
    with pytest.raises(DimensionError):
        net.MlpParams(spec, (np.zeros((20, 4)),) + p.weights[1:], p.biases)


# -- forward ----------------------------------------------------------------------------


def test_zero_weight_network_is_constant(spec):
    p = zero_net(spec, (1.5, -2.0, 0.25))
    for q in [(0, 0, 0), (0.3, 0.7, 0.5), (1, 1, 1)]:
        assert np.array_equal(net.forward(p, q), [1.5, -2.0, 0.25])


def test_identity_affine_network():
    spec = net.LayerSpec(3, 0, 1, 3)
    p = net.MlpParams(spec, [np.eye(3)], [np.zeros(3)])
    q = np.array([0.3, -0.7, 0.5])
    assert np.array_equal(net.forward(p, q), q)


def test_forward_matches_loop_evaluator(params):
    q = (0.3, 0.7, 0.5)
    np.testing.assert_allclose(net.forward(params, q), loop_forward(params, q), rtol=1e-14, atol=1e-15)


def test_batch_and_single_agree(params):
    q = np.random.default_rng(0).random((7, 3))
    batch = net.forward(params, q)
    for i in range(7):
        np.testing.assert_allclose(net.forward(params, q[i]), batch[i], rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("bad", [(np.nan, 0, 0), (0, np.inf, 0), (0, 0)])
def test_forward_rejects_bad_input(params, bad):
    with pytest.raises(InputError):
        net.forward(params, bad)


# -- forward_with_derivs ---------------------------------------------------------------------


def test_value_equals_forward(params):
    q = np.random.default_rng(3).random((10, 3))
    assert np.array_equal(net.forward_with_derivs(params, q).value, net.forward(params, q))


def test_zero_network_has_zero_derivatives(spec):
    b = net.forward_with_derivs(zero_net(spec, (1, 2, 3)), (0.2, 0.4, 0.6))
    assert np.all(b.jacobian == 0.0) and np.all(b.hessians == 0.0)


def test_affine_network_derivatives():
    spec = net.LayerSpec(3, 0, 1, 3)
    w = np.arange(9.0).reshape(3, 3) - 4.0
    p = net.MlpParams(spec, [w], [np.array([1.0, 2.0, 3.0])])
    b = net.forward_with_derivs(p, (0.1, 0.2, 0.3))
    assert np.array_equal(b.jacobian, w)
    assert np.all(b.hessians == 0.0)


def test_derivs_match_finite_differences_100_points(spec):
    rng = np.random.default_rng(11)
    worst_j = worst_h = 0.0
    for _ in range(100):
        p = net.init_params(spec, int(rng.integers(1 << 30)))
        je, _, he, _ = network_derivative_errors(p, rng.random(3))
        worst_j, worst_h = max(worst_j, je), max(worst_h, he)
    assert worst_j <= 1e-6
    assert worst_h <= 1e-5


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1),
       point=st.tuples(*[st.floats(-2.0, 2.0, allow_nan=False)] * 3))
def test_hessians_symmetric(seed, point):
    p = net.init_params(net.LayerSpec(3, 3, 8, 3), seed)
    h = net.forward_with_derivs(p, point).hessians
    assert np.all(np.abs(h - h.transpose(0, 2, 1)) <= 1e-12 * (1 + np.abs(h)))
    assert np.all(np.isfinite(h))


def test_derivs_deterministic(params):
    q = (0.1, 0.9, 0.4)
    a, b = net.forward_with_derivs(params, q), net.forward_with_derivs(params, q)
    assert np.array_equal(a.hessians, b.hessians) and np.array_equal(a.jacobian, b.jacobian)


# -- grad_scalar -------------------------------------------------------------------------------------


def test_grad_of_constant_objective(params):
    value, g = net.grad_scalar(params, lambda q: 0.0)
    assert value == 0.0
    assert np.all(g.flat() == 0.0)


def test_grad_of_squared_output_bias(spec):
    c = np.array([0.5, -1.0, 2.0])
    p = zero_net(spec, c)

    def obj(q):
        out = net.traced_forward(q, np.array([[0.3, 0.2, 0.1]]))
        return (out * out).sum()

    value, g = net.grad_scalar(p, obj)
    assert value == pytest.approx(float(c @ c))
    assert np.array_equal(g.biases[-1], 2 * c)
    others = np.concatenate([g.flat()[:-3]])
    assert np.all(others == 0.0)


def test_grad_total_loss_matches_fd_16_points(params, sp):
    rng = np.random.default_rng(5)
    dp = rng.random((16, 3))
    dt = pde.analytic_solution(dp, sp)
    cp = rng.random((16, 3))
    _, g = net.grad_scalar(params, batch_objective(dp, dt, cp, sp))
    fd = batch_gradient_oracle(params, dp, dt, cp, sp)
    assert gradient_check(g.flat(), fd).worst <= 1e-5


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_grad_reports_nonfinite_block(spec):
    p = net.init_params(spec, 0)
    huge = [w.copy() for w in p.weights]
    huge[0][:] = 1e300
    bad = net.MlpParams(spec, huge, p.biases)

    def obj(q):
        out = net.traced_forward(q, np.array([[1.0, 1.0, 1.0]]))
        return (out * out * 1e300 * 1e300).sum()

    with pytest.raises(NumericError, match=r"weights\[|biases\["):
        net.grad_scalar(bad, obj)


def test_flat_roundtrip(params):
    assert np.array_equal(params.with_flat(params.flat()).flat(), params.flat())
    assert params.size == params.flat().size == 3 * 20 + 20 + 4 * (20 * 20 + 20) + 20 * 3 + 3
