"""
SGD with momentum and cosine learning-rate decay.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from apps.core.exceptions import ParameterError
from .module import Parameter

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """Schedule position and momentum buffers of one training run."""
    learning_rate: float
    total_steps: int
    step: int = 0
    momentum: float = 0.9
    weight_decay: float = 0.0
    grad_clip: Optional[float] = None
    buffers: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ParameterError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.total_steps <= 0:
            raise ParameterError(f"total_steps must be > 0, got {self.total_steps}")
        if not 0.0 <= self.momentum < 1.0:
            raise ParameterError(f"momentum must lie in [0, 1), got {self.momentum}")

    def effective_rate(self, step: Optional[int] = None) -> float:
        """Cosine-decayed rate; past total_steps the final value is kept."""
        t = min(self.step if step is None else step, self.total_steps)
        return self.learning_rate * 0.5 * (1.0 + math.cos(math.pi * t / self.total_steps))


class SGD:
    """
    SGD with heavy-ball momentum over named parameters.

    The first update of a parameter seeds its buffer with the raw gradient.
    """

    def __init__(self, named_params: Sequence[Tuple[str, Parameter]], state: OptimizerState):
        self.named_params: List[Tuple[str, Parameter]] = list(named_params)
        self.state = state

    def zero_grad(self):
        for _, param in self.named_params:
            param.zero_grad()

    def global_grad_norm(self) -> float:
        return float(np.sqrt(np.sum([np.sum(p.grad * p.grad) for _, p in self.named_params])))

    def step(self):
        rate = self.state.effective_rate()
        clip_factor = 1.0
        if self.state.grad_clip:
            norm = self.global_grad_norm()
            if norm > self.state.grad_clip:
                clip_factor = self.state.grad_clip / norm

        for name, param in self.named_params:
            grad = param.grad * clip_factor
            if self.state.weight_decay:
                grad = grad + self.state.weight_decay * param.value
            buffer = self.state.buffers.get(name)
            if buffer is None or self.state.momentum == 0:
                buffer = grad
            else:
                buffer = self.state.momentum * buffer + grad
            self.state.buffers[name] = buffer
            param.value = param.value - rate * buffer

        self.state.step += 1
        self.zero_grad()


def step(state: OptimizerState, named_params: Sequence[Tuple[str, Parameter]]):
    """Apply one update to named_params with the state's current rate."""
    SGD(named_params, state).step()
