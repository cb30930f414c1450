"""
Tests for the differentiable primitives and the backward pass.
"""

import numpy as np
import pytest

from apps.core.exceptions import ContractError, DimensionError, NonFiniteError, ParameterError
from apps.diffkernel import ops
from apps.diffkernel.gradcheck import check_gradients
from apps.diffkernel.module import Parameter
from apps.diffkernel.tensor import DiffNode, backward, constant, no_grad


def test_matmul_identity_and_hand_expansion():
    result = ops.matmul(constant([[1, 0], [0, 1]]), constant([[3, 4], [5, 6]]))
    np.testing.assert_array_equal(result.value, [[3, 4], [5, 6]])

    result = ops.matmul(constant([[1, 2]]), constant([[3], [4]]))
    np.testing.assert_array_equal(result.value, [[11]])


def test_matmul_gradient_of_sum():
    a = Parameter([[1.0, 2.0], [3.0, 4.0]], name='a')
    b = constant(np.ones((2, 2)))
    backward(ops.sum(ops.matmul(a, b)))
    np.testing.assert_allclose(a.grad, [[2, 2], [2, 2]])


def test_matmul_shape_mismatch_names_both_shapes():
    with pytest.raises(DimensionError) as excinfo:
        ops.matmul(constant(np.ones((2, 3))), constant(np.ones((2, 3))))
    assert '(2, 3)' in str(excinfo.value)


def test_softmax_examples():
    np.testing.assert_allclose(ops.softmax(constant([0.0, 0.0, 0.0]), axis=0).value, [1 / 3] * 3)
    np.testing.assert_allclose(ops.softmax(constant([1000.0, 1000.0]), axis=0).value, [0.5, 0.5])
    np.testing.assert_allclose(
        ops.softmax(constant([1.0, 2.0, 3.0]), axis=0).value,
        [0.0900, 0.2447, 0.6652],
        atol=1e-4,
    )


def test_softmax_rejects_invalid_axis():
    with pytest.raises(DimensionError):
        ops.softmax(constant([1.0, 2.0]), axis=3)


def test_grad_reverse_forward_is_identity():
    x = Parameter([1.0, 2.0, 3.0])
    out = ops.grad_reverse(x, 1.0)
    assert np.array_equal(out.value, x.value)


@pytest.mark.parametrize('lam,upstream,expected', [
    (1.0, [1.0, 1.0], [-1.0, -1.0]),
    (0.5, [2.0, -4.0], [-1.0, 2.0]),
    (0.0, [3.0, -1.0], [0.0, 0.0]),
])
def test_grad_reverse_backward_scales_by_minus_lambda(lam, upstream, expected):
    x = Parameter([0.3, -0.7])
    out = ops.grad_reverse(x, lam)
    backward(ops.sum(ops.mul(out, constant(upstream))))
    assert np.array_equal(x.grad, -lam * np.asarray(upstream))
    np.testing.assert_allclose(x.grad, expected)


def test_grad_reverse_rejects_negative_lambda():
    with pytest.raises(ParameterError):
        ops.grad_reverse(Parameter([1.0]), -0.1)


def test_grad_reverse_only_changes_upstream_gradients():
    rng = np.random.default_rng(3)
    w = Parameter(rng.normal(size=(3, 2)))
    v = Parameter(rng.normal(size=(2, 1)))
    x = constant(rng.normal(size=(4, 3)))

    def run(reverse):
        w.zero_grad()
        v.zero_grad()
        hidden = ops.tanh(ops.matmul(x, w))
        if reverse:
            hidden = ops.grad_reverse(hidden, 0.5)
        loss = ops.sum(ops.matmul(hidden, v))
        backward(loss)
        return loss.value.copy(), w.grad.copy(), v.grad.copy()

    plain_loss, plain_w, plain_v = run(False)
    rev_loss, rev_w, rev_v = run(True)
    assert np.array_equal(plain_loss, rev_loss)
    assert np.array_equal(plain_v, rev_v)
    np.testing.assert_allclose(rev_w, -0.5 * plain_w, rtol=1e-15)


def test_backward_sum_gives_ones():
    w = Parameter(np.arange(6.0).reshape(2, 3))
    backward(ops.sum(w))
    np.testing.assert_array_equal(w.grad, np.ones((2, 3)))


def test_backward_quadratic():
    w = Parameter([3.0, -2.0])
    backward(ops.scale(ops.sum(ops.mul(w, w)), 0.5))
    np.testing.assert_allclose(w.grad, [3.0, -2.0])


def test_backward_requires_scalar_loss():
    w = Parameter([1.0, 2.0])
    with pytest.raises(ContractError):
        backward(ops.scale(w, 2.0))


def test_backward_visits_shared_nodes_once():
    w = Parameter([2.0])
    shared = ops.mul(w, w)
    backward(ops.sum(ops.add(shared, shared)))
    np.testing.assert_allclose(w.grad, [8.0])


def test_non_finite_values_are_rejected():
    with pytest.raises(NonFiniteError):
        DiffNode([1.0, np.nan])


def test_no_grad_records_no_parents():
    w = Parameter([1.0, 2.0])
    with no_grad():
        out = ops.mul(w, w)
    assert out.parents == ()
    assert not out.requires_grad


def test_two_layer_mlp_matches_finite_differences():
    rng = np.random.default_rng(0)
    w1 = Parameter(rng.normal(size=(4, 5)), name='w1')
    b1 = Parameter(rng.normal(size=(5,)), name='b1')
    w2 = Parameter(rng.normal(size=(5, 3)), name='w2')
    x = constant(rng.normal(size=(2, 4)))

    def loss_fn():
        hidden = ops.tanh(ops.add(ops.matmul(x, w1), b1))
        return ops.cross_entropy(ops.matmul(hidden, w2), [0, 2])

    report = check_gradients(loss_fn, [('w1', w1), ('b1', b1), ('w2', w2)])
    assert report.max_relative_error < 1e-4


@pytest.mark.parametrize('build', [
    lambda p, rng: ops.softmax(ops.mul(p, constant(rng.normal(size=(3, 4)))), axis=1),
    lambda p, rng: ops.log_softmax(p, axis=0),
    lambda p, rng: ops.sigmoid(p),
    lambda p, rng: ops.relu(ops.add(p, constant(np.full((3, 4), 0.05)))),
    lambda p, rng: ops.layer_norm(p, constant(rng.normal(size=(4,))), constant(rng.normal(size=(4,)))),
    lambda p, rng: ops.swapaxes(ops.reshape(p, (4, 3)), 0, 1),
    lambda p, rng: ops.concat([p, ops.scale(p, 2.0)], axis=1),
    lambda p, rng: ops.stack([ops.select(p, 0, axis=0), ops.select(p, 2, axis=0)], axis=0),
    lambda p, rng: ops.slice_axis(p, 1, 3, axis=1),
    lambda p, rng: ops.mean(p, axis=0),
    lambda p, rng: ops.huber(p, rng.normal(size=(3, 4)) * 2.0, delta=1.0),
])
def test_primitive_gradients_match_finite_differences(build):
    rng = np.random.default_rng(11)
    p = Parameter(rng.normal(size=(3, 4)), name='p')
    weights = rng.normal(size=build(p, np.random.default_rng(5)).shape)

    def loss_fn():
        out = build(p, np.random.default_rng(5))
        return ops.sum(ops.mul(out, constant(weights)))

    report = check_gradients(loss_fn, [('p', p)])
    assert report.max_relative_error < 1e-4


def test_conv1d_time_and_batched_matmul_gradients():
    rng = np.random.default_rng(2)
    x = Parameter(rng.normal(size=(2, 5, 3)), name='x')
    kernel = Parameter(rng.normal(size=(3, 3, 4)), name='kernel')
    proj = Parameter(rng.normal(size=(4, 2)), name='proj')

    def loss_fn():
        hidden = ops.tanh(ops.conv1d_time(x, kernel))
        return ops.sum(ops.mul(ops.matmul(hidden, proj), constant(np.linspace(-1, 1, 20).reshape(2, 5, 2))))

    report = check_gradients(loss_fn, [('x', x), ('kernel', kernel), ('proj', proj)])
    assert report.max_relative_error < 1e-4


def test_huber_branches():
    assert ops.huber(constant(0.0), 0.5, delta=1.0).item() == pytest.approx(0.125)
    assert ops.huber(constant(0.0), 3.0, delta=1.0).item() == pytest.approx(2.5)


def test_cross_entropy_is_translation_invariant():
    logits = np.array([[1.0, -2.0, 0.5], [0.1, 0.2, 0.3]])
    base = ops.cross_entropy(constant(logits), [0, 2]).item()
    shifted = ops.cross_entropy(constant(logits + 7.5), [0, 2]).item()
    assert abs(base - shifted) < 1e-9


def test_cross_entropy_large_margin_goes_to_zero():
    logits = np.array([[50.0, 0.0, 0.0]])
    assert ops.cross_entropy(constant(logits), [0]).item() < 1e-12
