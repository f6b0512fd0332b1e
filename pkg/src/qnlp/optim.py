"""First-order optimizers that update :class:`~qnlp.tensor.Tensor` leaves in place."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .tensor import ContractError, Tensor


class Optimizer:
    def __init__(self, params: Sequence[Tensor], lr: float):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.lr = lr

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def _grads(self) -> list:
        # a parameter the loss never touched gets a zero gradient
        return [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        raise NotImplementedError


class SGD(Optimizer):
    """Plain gradient descent: ``p <- p - lr * g``."""

    def step(self) -> None:
        for p, g in zip(self.params, self._grads()):
            p.data -= self.lr * g


class Adam(Optimizer):
    """Adaptive-moment descent with bias correction."""

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 0.01,
        betas: tuple = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        super().__init__(params, lr)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        if len(self.m) != len(self.params) or len(self.v) != len(self.params):
            raise ContractError(
                f"optimizer state has {len(self.m)} slots for {len(self.params)} parameters"
            )
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, self._grads(), self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(name: str, params: Sequence[Tensor], lr: float) -> Optimizer:
    if name == "adam":
        return Adam(params, lr=lr)
    if name == "sgd":
        return SGD(params, lr=lr)
    raise ValueError(f"unknown optimizer {name!r}")
