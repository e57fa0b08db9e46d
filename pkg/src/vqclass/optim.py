"""Plain-numpy optimizers for small parameter tensors."""
from __future__ import annotations

import numpy as np

OPTIMIZER_NAMES = ("sgd", "sgd_momentum", "adam")


class Sgd:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, param: np.ndarray, grad: np.ndarray) -> None:
        param -= self.learning_rate * grad


class SgdMomentum:
    """Classic momentum: v <- beta*v + g; p <- p - lr*v."""

    def __init__(self, learning_rate: float, beta: float = 0.9):
        self.learning_rate = learning_rate
        self.beta = beta
        self.velocity = None

    def step(self, param: np.ndarray, grad: np.ndarray) -> None:
        if self.velocity is None:
            self.velocity = np.zeros_like(param)
        self.velocity = self.beta * self.velocity + grad
        param -= self.learning_rate * self.velocity


class Adam:
    def __init__(
        self,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, param: np.ndarray, grad: np.ndarray) -> None:
        if self.m is None:
            self.m = np.zeros_like(param)
            self.v = np.zeros_like(param)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        param -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(name: str, learning_rate: float):
    if name == "sgd":
        return Sgd(learning_rate)
    if name == "sgd_momentum":
        return SgdMomentum(learning_rate)
    if name == "adam":
        return Adam(learning_rate)
    raise ValueError(f"unknown optimizer {name!r}; choose from {OPTIMIZER_NAMES}")
