"""
Finite-difference gradient checking.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from .module import Parameter
from .tensor import DiffNode, backward


@dataclass
class GradCheckReport:
    max_relative_error: float
    worst_parameter: str
    checked_entries: int

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_relative_error < tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-4) -> np.ndarray:
    """|a - n| / max(|a|, |n|, floor); the floor keeps near-zero entries absolute."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def numerical_gradient(loss_fn: Callable[[], DiffNode], param: Parameter, eps: float = 1e-5) -> np.ndarray:
    """Central differences of loss_fn with respect to every entry of param."""
    param.value = param.value.copy()
    grad = np.zeros_like(param.value)
    flat = param.value.reshape(-1)
    for index in range(flat.size):
        original = flat[index]
        flat[index] = original + eps
        plus = loss_fn().item()
        flat[index] = original - eps
        minus = loss_fn().item()
        flat[index] = original
        grad.reshape(-1)[index] = (plus - minus) / (2.0 * eps)
    return grad


def check_gradients(
    loss_fn: Callable[[], DiffNode],
    named_params: Sequence[Tuple[str, Parameter]],
    eps: float = 1e-5,
    floor: float = 1e-4,
) -> GradCheckReport:
    """
    Compare analytic gradients of loss_fn against central differences.

    loss_fn must rebuild the graph on every call.
    """
    for _, param in named_params:
        param.zero_grad()
    backward(loss_fn())
    analytic: Dict[str, np.ndarray] = {name: param.grad.copy() for name, param in named_params}

    worst_error, worst_name, checked = 0.0, '', 0
    for name, param in named_params:
        numeric = numerical_gradient(loss_fn, param, eps=eps)
        errors = relative_error(analytic[name], numeric, floor=floor)
        checked += errors.size
        if errors.size and errors.max() > worst_error:
            worst_error, worst_name = float(errors.max()), name
    return GradCheckReport(worst_error, worst_name, checked)
