"""
Differentiable primitives.

Every op accepts DiffNodes or plain array-likes (treated as constants) and
returns a DiffNode whose backward rule returns one gradient per parent.
"""

from typing import Sequence, Tuple, Union

import numpy as np

from apps.core.exceptions import DimensionError, ParameterError
from .tensor import DiffNode, constant

NodeLike = Union[DiffNode, np.ndarray, float, list]


def _node(x: NodeLike) -> DiffNode:
    return x if isinstance(x, DiffNode) else constant(x)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_axis(x: DiffNode, axis: int) -> int:
    ndim = x.value.ndim
    if not -ndim <= axis < ndim:
        raise DimensionError(f"axis {axis} is invalid for shape {x.shape}")
    return axis % ndim


# ---------------------------------------------------------------------------
# Elementwise arithmetic
# ---------------------------------------------------------------------------

def add(a: NodeLike, b: NodeLike) -> DiffNode:
    a, b = _node(a), _node(b)

    def backward_fn(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return DiffNode(a.value + b.value, (a, b), backward_fn)


def sub(a: NodeLike, b: NodeLike) -> DiffNode:
    a, b = _node(a), _node(b)

    def backward_fn(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return DiffNode(a.value - b.value, (a, b), backward_fn)


def mul(a: NodeLike, b: NodeLike) -> DiffNode:
    a, b = _node(a), _node(b)

    def backward_fn(g):
        return unbroadcast(g * b.value, a.shape), unbroadcast(g * a.value, b.shape)

    return DiffNode(a.value * b.value, (a, b), backward_fn)


def scale(a: NodeLike, factor: float) -> DiffNode:
    a = _node(a)
    return DiffNode(a.value * factor, (a,), lambda g: (g * factor,))


def neg(a: NodeLike) -> DiffNode:
    return scale(a, -1.0)


# ---------------------------------------------------------------------------
# Linear algebra and shape manipulation
# ---------------------------------------------------------------------------

def matmul(a: NodeLike, b: NodeLike) -> DiffNode:
    """
    Matrix product over the last two axes, batched over leading axes.

    Raises:
        DimensionError: when the inner extents differ
    """
    a, b = _node(a), _node(b)
    if a.value.ndim < 2 or b.value.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")

    def backward_fn(g):
        grad_a = np.matmul(g, np.swapaxes(b.value, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.value, -1, -2), g)
        return unbroadcast(grad_a, a.shape), unbroadcast(grad_b, b.shape)

    return DiffNode(np.matmul(a.value, b.value), (a, b), backward_fn)


def swapaxes(a: NodeLike, axis1: int, axis2: int) -> DiffNode:
    a = _node(a)
    return DiffNode(
        np.swapaxes(a.value, axis1, axis2), (a,),
        lambda g: (np.swapaxes(g, axis1, axis2),)
    )


def reshape(a: NodeLike, shape: Tuple[int, ...]) -> DiffNode:
    a = _node(a)
    original = a.shape
    try:
        value = a.value.reshape(shape)
    except ValueError as exc:
        raise DimensionError(f"cannot reshape {original} into {shape}") from exc
    return DiffNode(value, (a,), lambda g: (g.reshape(original),))


def concat(nodes: Sequence[NodeLike], axis: int = 0) -> DiffNode:
    nodes = [_node(n) for n in nodes]
    try:
        value = np.concatenate([n.value for n in nodes], axis=axis)
    except ValueError as exc:
        shapes = [n.shape for n in nodes]
        raise DimensionError(f"concat: incompatible shapes {shapes}") from exc
    bounds = np.cumsum([n.shape[axis] for n in nodes])[:-1]

    def backward_fn(g):
        return tuple(np.split(g, bounds, axis=axis))

    return DiffNode(value, nodes, backward_fn)


def stack(nodes: Sequence[NodeLike], axis: int = 0) -> DiffNode:
    nodes = [_node(n) for n in nodes]
    try:
        value = np.stack([n.value for n in nodes], axis=axis)
    except ValueError as exc:
        shapes = [n.shape for n in nodes]
        raise DimensionError(f"stack: incompatible shapes {shapes}") from exc

    def backward_fn(g):
        return tuple(np.moveaxis(g, axis, 0))

    return DiffNode(value, nodes, backward_fn)


def slice_axis(a: NodeLike, start: int, stop: int, axis: int = -1) -> DiffNode:
    a = _node(a)
    axis = _check_axis(a, axis)
    index = [slice(None)] * a.value.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)

    def backward_fn(g):
        grad = np.zeros_like(a.value)
        grad[index] = g
        return (grad,)

    return DiffNode(a.value[index], (a,), backward_fn)


def select(a: NodeLike, position: int, axis: int = 0) -> DiffNode:
    """Pick one entry along axis, dropping that axis."""
    a = _node(a)
    axis = _check_axis(a, axis)

    def backward_fn(g):
        grad = np.zeros_like(a.value)
        index = [slice(None)] * a.value.ndim
        index[axis] = position
        grad[tuple(index)] = g
        return (grad,)

    return DiffNode(np.take(a.value, position, axis=axis), (a,), backward_fn)


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------

def sum(a: NodeLike, axis=None, keepdims: bool = False) -> DiffNode:  # noqa: A001
    a = _node(a)
    shape = a.shape

    def backward_fn(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return DiffNode(a.value.sum(axis=axis, keepdims=keepdims), (a,), backward_fn)


def mean(a: NodeLike, axis=None, keepdims: bool = False) -> DiffNode:
    a = _node(a)
    count = a.value.size if axis is None else np.prod(
        [a.shape[ax] for ax in np.atleast_1d(axis)]
    )
    return scale(sum(a, axis=axis, keepdims=keepdims), 1.0 / float(count))


# ---------------------------------------------------------------------------
# Nonlinearities
# ---------------------------------------------------------------------------

def relu(a: NodeLike) -> DiffNode:
    a = _node(a)
    mask = a.value > 0
    return DiffNode(a.value * mask, (a,), lambda g: (g * mask,))


def tanh(a: NodeLike) -> DiffNode:
    a = _node(a)
    y = np.tanh(a.value)
    return DiffNode(y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a: NodeLike) -> DiffNode:
    a = _node(a)
    y = 0.5 * (1.0 + np.tanh(0.5 * a.value))
    return DiffNode(y, (a,), lambda g: (g * y * (1.0 - y),))


def softmax(x: NodeLike, axis: int = -1) -> DiffNode:
    """
    Softmax along axis, computed with max-subtraction.
    """
    x = _node(x)
    axis = _check_axis(x, axis)
    shifted = x.value - x.value.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    y = exp / exp.sum(axis=axis, keepdims=True)

    def backward_fn(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return DiffNode(y, (x,), backward_fn)


def log_softmax(x: NodeLike, axis: int = -1) -> DiffNode:
    x = _node(x)
    axis = _check_axis(x, axis)
    shifted = x.value - x.value.max(axis=axis, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    y = shifted - log_norm
    probs = np.exp(y)

    def backward_fn(g):
        return (g - probs * g.sum(axis=axis, keepdims=True),)

    return DiffNode(y, (x,), backward_fn)


def layer_norm(x: NodeLike, gamma: NodeLike, beta: NodeLike, eps: float = 1e-5) -> DiffNode:
    """
    Normalize over the last axis, then apply the affine gamma/beta.
    """
    x, gamma, beta = _node(x), _node(gamma), _node(beta)
    width = x.shape[-1]
    mu = x.value.mean(axis=-1, keepdims=True)
    centered = x.value - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std

    def backward_fn(g):
        dxhat = g * gamma.value
        grad_x = inv_std / width * (
            width * dxhat
            - dxhat.sum(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
        )
        grad_gamma = unbroadcast(g * xhat, gamma.shape)
        grad_beta = unbroadcast(g, beta.shape)
        return grad_x, grad_gamma, grad_beta

    return DiffNode(xhat * gamma.value + beta.value, (x, gamma, beta), backward_fn)


def grad_reverse(x: DiffNode, lam: float = 1.0) -> DiffNode:
    """
    Identity on the forward pass; multiplies the incoming gradient by -lam.

    Raises:
        ParameterError: if lam is negative
    """
    if lam < 0:
        raise ParameterError(f"gradient reversal lambda must be >= 0, got {lam}")
    x = _node(x)
    factor = -float(lam)
    return DiffNode(x.value, (x,), lambda g: (factor * g,), name='grad_reverse')


def conv1d_time(x: NodeLike, weight: NodeLike) -> DiffNode:
    """
    Same-padded temporal convolution.

    x has shape (batch, time, in_channels); weight has shape
    (kernel, in_channels, out_channels) with an odd kernel.
    """
    x, weight = _node(x), _node(weight)
    kernel, in_channels, _ = weight.shape
    if kernel % 2 == 0 or x.shape[-1] != in_channels:
        raise DimensionError(f"conv1d_time: input {x.shape} does not fit kernel {weight.shape}")
    pad = kernel // 2
    steps = x.shape[1]
    padded = np.pad(x.value, ((0, 0), (pad, pad), (0, 0)))
    out = np.zeros(x.shape[:2] + (weight.shape[2],))
    for j in range(kernel):
        out += np.matmul(padded[:, j:j + steps], weight.value[j])

    def backward_fn(g):
        grad_padded = np.zeros_like(padded)
        grad_w = np.zeros_like(weight.value)
        flat_g = g.reshape(-1, g.shape[-1])
        for j in range(kernel):
            grad_padded[:, j:j + steps] += np.matmul(g, weight.value[j].T)
            window = padded[:, j:j + steps].reshape(-1, in_channels)
            grad_w[j] = window.T @ flat_g
        return grad_padded[:, pad:pad + steps], grad_w

    return DiffNode(out, (x, weight), backward_fn)


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def cross_entropy(logits: NodeLike, targets: Sequence[int]) -> DiffNode:
    """
    Mean multi-class cross-entropy of (N, K) logits against integer targets.
    """
    logits = _node(logits)
    targets = np.asarray(targets, dtype=int)
    count, classes = logits.shape
    if targets.shape != (count,):
        raise DimensionError(f"cross_entropy: {count} rows but {targets.shape} targets")
    if np.any(targets < 0) or np.any(targets >= classes):
        raise ParameterError(f"cross_entropy: targets must lie in [0, {classes})")
    shifted = logits.value - logits.value.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.arange(count)
    value = -log_probs[rows, targets].mean()

    def backward_fn(g):
        grad = np.exp(log_probs)
        grad[rows, targets] -= 1.0
        return (grad * (g / count),)

    return DiffNode(value, (logits,), backward_fn)


def huber(pred: NodeLike, target, delta: float = 1.0) -> DiffNode:
    """
    Huber loss summed over the last axis and averaged over rows.
    """
    if delta <= 0:
        raise ParameterError(f"huber delta must be > 0, got {delta}")
    pred = _node(pred)
    target = np.asarray(target, dtype=np.float64)
    if target.shape != pred.shape:
        raise DimensionError(f"huber: prediction {pred.shape} vs target {target.shape}")
    residual = pred.value - target
    small = np.abs(residual) <= delta
    per_elem = np.where(small, 0.5 * residual ** 2, delta * (np.abs(residual) - 0.5 * delta))
    rows = residual.shape[0] if residual.ndim > 1 else 1
    value = per_elem.sum() / rows

    def backward_fn(g):
        grad = np.where(small, residual, delta * np.sign(residual))
        return (grad * (g / rows),)

    return DiffNode(value, (pred,), backward_fn)
