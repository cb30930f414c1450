"""
Dense float64 tensors and the reverse-mode computation graph.

A tensor is a float64 ``numpy.ndarray``; a ``DiffNode`` pairs one with its
gradient and the rule that pushes gradients to its parents.
"""

import contextlib
import threading
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from apps.core.exceptions import ContractError, NonFiniteError

DTYPE = np.float64

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, 'grad_enabled', True)


@contextlib.contextmanager
def no_grad():
    """Build values only; no parents or backward rules are recorded."""
    previous = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def as_tensor(data) -> np.ndarray:
    """
    Convert data to a finite float64 array.

    Raises:
        NonFiniteError: if any element is NaN or Inf
    """
    arr = np.asarray(data, dtype=DTYPE)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"tensor of shape {arr.shape} contains NaN or Inf")
    return arr


class DiffNode:
    """
    Value-plus-gradient node in the reverse-mode computation graph.
    """
    __slots__ = ('value', 'grad', 'parents', 'backward_fn', 'requires_grad', 'name')

    def __init__(
        self,
        value,
        parents: Sequence['DiffNode'] = (),
        backward_fn: Optional[BackwardFn] = None,
        requires_grad: Optional[bool] = None,
        name: str = ''
    ):
        self.value = as_tensor(value)
        if requires_grad is None:
            requires_grad = any(parent.requires_grad for parent in parents)
        if not grad_enabled():
            requires_grad = requires_grad and not parents
            parents = ()
            backward_fn = None
        self.requires_grad = requires_grad
        self.parents: Tuple['DiffNode', ...] = tuple(parents) if requires_grad else ()
        self.backward_fn = backward_fn if requires_grad else None
        self.grad = np.zeros_like(self.value)
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def zero_grad(self):
        self.grad = np.zeros_like(self.value)

    def item(self) -> float:
        return float(self.value.reshape(-1)[0])

    def __repr__(self):
        label = f" {self.name}" if self.name else ''
        return f"<DiffNode{label} shape={self.value.shape}>"


def constant(data) -> DiffNode:
    """Wrap data as a leaf that never receives gradients."""
    if isinstance(data, DiffNode):
        return data
    return DiffNode(data, requires_grad=False)


def _topological_order(root: DiffNode) -> List[DiffNode]:
    """Parents before children; each node appears once."""
    order: List[DiffNode] = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: DiffNode) -> None:
    """
    Accumulate d(loss)/d(node) into the grad of every reachable node.

    Raises:
        ContractError: if loss is not a scalar
    """
    if loss.value.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.value.shape}")
    if not loss.requires_grad:
        return

    order = _topological_order(loss)
    loss.grad = np.ones_like(loss.value)
    for node in reversed(order):
        if node.backward_fn is None:
            continue
        parent_grads = node.backward_fn(node.grad)
        for parent, grad in zip(node.parents, parent_grads):
            if grad is None or not parent.requires_grad:
                continue
            parent.grad = parent.grad + grad
