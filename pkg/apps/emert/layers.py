"""
Neural building blocks on top of the diffkernel ops.
"""

from typing import Optional

import numpy as np

from apps.core.exceptions import ConfigError, DimensionError
from apps.diffkernel import ops
from apps.diffkernel.module import Module, Parameter, xavier_uniform
from apps.diffkernel.tensor import DiffNode, constant


class Linear(Module):
    """x @ W + b over the last axis."""

    def __init__(self, rng: np.random.Generator, in_width: int, out_width: int, zero: bool = False):
        shape = (in_width, out_width)
        self.weight = Parameter(np.zeros(shape) if zero else xavier_uniform(rng, shape))
        self.bias = Parameter(np.zeros(out_width))

    def __call__(self, x: DiffNode) -> DiffNode:
        if x.shape[-1] != self.weight.shape[0]:
            raise DimensionError(f"Linear expects width {self.weight.shape[0]}, got input {x.shape}")
        return ops.add(ops.matmul(x, self.weight), self.bias)


class MLP(Module):
    """Two linear layers with a ReLU between them."""

    def __init__(self, rng: np.random.Generator, in_width: int, hidden: int, out_width: int):
        self.hidden = Linear(rng, in_width, hidden)
        self.output = Linear(rng, hidden, out_width)

    def __call__(self, x: DiffNode) -> DiffNode:
        return self.output(ops.relu(self.hidden(x)))


class LayerNorm(Module):
    def __init__(self, width: int):
        self.gamma = Parameter(np.ones(width))
        self.beta = Parameter(np.zeros(width))

    def __call__(self, x: DiffNode) -> DiffNode:
        return ops.layer_norm(x, self.gamma, self.beta)


class LSTM(Module):
    """
    Single-layer LSTM returning the hidden state of every step.

    Gates are packed as (input, forget, cell, output); the forget bias
    starts at 1.
    """

    def __init__(self, rng: np.random.Generator, in_width: int, hidden: int, zero: bool = False):
        self.hidden_width = hidden
        self.input_weight = Parameter(np.zeros((in_width, 4 * hidden)) if zero else xavier_uniform(
            rng, (in_width, 4 * hidden)))
        self.recurrent_weight = Parameter(np.zeros((hidden, 4 * hidden)) if zero else xavier_uniform(
            rng, (hidden, 4 * hidden)))
        bias = np.zeros(4 * hidden)
        if not zero:
            bias[hidden:2 * hidden] = 1.0
        self.bias = Parameter(bias)

    def __call__(self, x: DiffNode) -> DiffNode:
        if x.value.ndim != 3 or x.shape[-1] != self.input_weight.shape[0]:
            raise DimensionError(
                f"LSTM expects (batch, time, {self.input_weight.shape[0]}), got {x.shape}"
            )
        batch, steps, _ = x.shape
        width = self.hidden_width
        projected = ops.add(ops.matmul(x, self.input_weight), self.bias)
        h = constant(np.zeros((batch, width)))
        c = constant(np.zeros((batch, width)))
        outputs = []
        for t in range(steps):
            gates = ops.add(ops.select(projected, t, axis=1), ops.matmul(h, self.recurrent_weight))
            i = ops.sigmoid(ops.slice_axis(gates, 0, width))
            f = ops.sigmoid(ops.slice_axis(gates, width, 2 * width))
            g = ops.tanh(ops.slice_axis(gates, 2 * width, 3 * width))
            o = ops.sigmoid(ops.slice_axis(gates, 3 * width, 4 * width))
            c = ops.add(ops.mul(f, c), ops.mul(i, g))
            h = ops.mul(o, ops.tanh(c))
            outputs.append(h)
        return ops.stack(outputs, axis=1)


class TemporalConvStack(Module):
    """
    Per-frame projection followed by a same-padded temporal convolution.
    """

    def __init__(self, rng: np.random.Generator, in_width: int, hidden: int, kernel: int = 3, zero: bool = False):
        self.frame = Linear(rng, in_width, hidden, zero=zero)
        shape = (kernel, hidden, hidden)
        self.conv_weight = Parameter(np.zeros(shape) if zero else xavier_uniform(rng, shape))
        self.conv_bias = Parameter(np.zeros(hidden))

    def __call__(self, x: DiffNode) -> DiffNode:
        framed = ops.relu(self.frame(x))
        return ops.relu(ops.add(ops.conv1d_time(framed, self.conv_weight), self.conv_bias))


class MultiHeadAttention(Module):
    """
    Scaled dot-product attention with separate query and context inputs.

    The weights of the last call are kept in `last_weights` with shape
    (batch, heads, queries, keys).
    """

    def __init__(self, rng: np.random.Generator, width: int, heads: int):
        if width % heads:
            raise ConfigError(f"attention width {width} is not divisible by {heads} heads")
        self.heads = heads
        self.head_width = width // heads
        self.query = Linear(rng, width, width)
        self.key = Linear(rng, width, width)
        self.value = Linear(rng, width, width)
        self.output = Linear(rng, width, width)
        self.last_weights: Optional[np.ndarray] = None

    def _split(self, x: DiffNode) -> DiffNode:
        batch, tokens, _ = x.shape
        return ops.swapaxes(ops.reshape(x, (batch, tokens, self.heads, self.head_width)), 1, 2)

    def __call__(self, x: DiffNode, context: DiffNode) -> DiffNode:
        batch, tokens, width = x.shape
        q = self._split(self.query(x))
        k = self._split(self.key(context))
        v = self._split(self.value(context))
        scores = ops.scale(ops.matmul(q, ops.swapaxes(k, -1, -2)), 1.0 / np.sqrt(self.head_width))
        weights = ops.softmax(scores, axis=-1)
        self.last_weights = weights.value
        attended = ops.swapaxes(ops.matmul(weights, v), 1, 2)
        return self.output(ops.reshape(attended, (batch, tokens, width)))


class AttentionBlock(Module):
    """
    Attention, residual and layer norm, then a position-wise feed-forward
    block with its own residual and layer norm.
    """

    def __init__(self, rng: np.random.Generator, width: int, heads: int, ff_width: int):
        self.attention = MultiHeadAttention(rng, width, heads)
        self.attention_norm = LayerNorm(width)
        self.feed_forward = MLP(rng, width, ff_width, width)
        self.ff_norm = LayerNorm(width)

    def __call__(self, x: DiffNode, context: DiffNode) -> DiffNode:
        x = self.attention_norm(ops.add(x, self.attention(x, context)))
        return self.ff_norm(ops.add(x, self.feed_forward(x)))
