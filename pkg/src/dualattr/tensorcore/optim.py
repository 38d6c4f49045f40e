"""Parameter update rules: plain gradient descent and Adam.

Both update in place and clear gradients afterwards, so a training loop
is forward / backward / step. Parameters whose gradient buffer is still
empty are treated as having a zero gradient.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class GradientDescent:
    def __init__(self, params, lr: float):
        self.params = list(params)
        self.lr = float(lr)

    def step(self):
        for p in self.params:
            if p.grad is not None:
                p.values -= self.lr * p.grad
            p.grad = None


class Adam:
    """Adam with bias correction; defaults lr 1e-3, betas (0.9, 0.999), eps 1e-8."""

    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self._m = [np.zeros_like(p.values) for p in self.params]
        self._v = [np.zeros_like(p.values) for p in self.params]

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1**self.t
        bc2 = 1.0 - b2**self.t
        for i, p in enumerate(self.params):
            g = p.grad if p.grad is not None else 0.0
            self._m[i] = b1 * self._m[i] + (1.0 - b1) * g
            self._v[i] = b2 * self._v[i] + (1.0 - b2) * (g * g)
            m_hat = self._m[i] / bc1
            v_hat = self._v[i] / bc2
            p.values -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            p.grad = None


def zero_grads(params):
    for p in params:
        p.grad = None


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   shape: tuple) -> Tensor:
    """Uniform init in +-sqrt(6/(fan_in+fan_out)), the default for weight matrices."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True)


def zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)
