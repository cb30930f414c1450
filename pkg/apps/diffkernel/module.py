"""
Parameter containers and initializers.
"""

from typing import Dict, Iterator, List, Tuple

import numpy as np

from apps.core.exceptions import DimensionError
from .tensor import DiffNode


class Parameter(DiffNode):
    """A trainable leaf node."""
    __slots__ = ()

    def __init__(self, value, name: str = ''):
        super().__init__(value, requires_grad=True, name=name)


class Module:
    """
    Base class for anything that owns parameters.

    Parameters and sub-modules are discovered from instance attributes in
    assignment order, so naming is deterministic.
    """

    def named_parameters(self, prefix: str = '') -> Iterator[Tuple[str, Parameter]]:
        for attr, value in vars(self).items():
            name = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{name}.")
            elif isinstance(value, (list, tuple)):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{index}.")
                    elif isinstance(item, Parameter):
                        yield f"{name}.{index}", item
            elif isinstance(value, dict):
                for key in value:
                    item = value[key]
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{key}.")

    def parameters(self) -> List[Parameter]:
        return [param for _, param in self.named_parameters()]

    def zero_grad(self):
        for param in self.parameters():
            param.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: param.value.copy() for name, param in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]):
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(state))
        if missing:
            raise DimensionError(f"state is missing parameters: {missing}")
        for name, param in params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != param.shape:
                raise DimensionError(
                    f"parameter {name}: expected shape {param.shape}, got {value.shape}"
                )
            param.value = value.copy()
            param.zero_grad()

    def parameter_count(self) -> int:
        return int(np.sum([param.value.size for param in self.parameters()]))


def xavier_uniform(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """Glorot-uniform initialization for a (..., fan_in, fan_out) weight."""
    fan_in, fan_out = shape[-2], shape[-1]
    receptive = int(np.prod(shape[:-2])) if len(shape) > 2 else 1
    limit = np.sqrt(6.0 / ((fan_in + fan_out) * receptive))
    return rng.uniform(-limit, limit, size=shape)
