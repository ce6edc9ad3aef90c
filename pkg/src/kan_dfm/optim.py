"""First-order (Adam) and quasi-Newton (LBFGS) updates over flat
parameter vectors.

Both optimizers operate on plain numpy vectors; the trainer packs and
unpacks model coefficient tensors around them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(m=np.zeros(n), v=np.zeros(n))


def adam_step(
    x: np.ndarray,
    grad: np.ndarray,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> np.ndarray:
    """Standard bias-corrected Adam update; returns the new parameters."""
    if state.m.shape != grad.shape:
        raise ValueError("optimizer state shape does not match gradient")
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad**2
    m_hat = state.m / (1.0 - beta1**state.t)
    v_hat = state.v / (1.0 - beta2**state.t)
    update = lr * m_hat / (np.sqrt(v_hat) + eps)
    if not np.all(np.isfinite(update)):
        raise FloatingPointError("non-finite Adam update: training diverged")
    return x - update


@dataclass
class LbfgsHistory:
    """Curvature pairs for the two-loop recursion."""

    max_pairs: int = 10
    s: deque = field(default_factory=deque)
    y: deque = field(default_factory=deque)
    rho: deque = field(default_factory=deque)

    def push(self, s_vec: np.ndarray, y_vec: np.ndarray) -> None:
        sy = float(s_vec @ y_vec)
        if sy <= 0.0:
            return  # skip non-positive curvature pairs
        if len(self.s) >= self.max_pairs:
            self.s.popleft()
            self.y.popleft()
            self.rho.popleft()
        self.s.append(s_vec)
        self.y.append(y_vec)
        self.rho.append(1.0 / sy)

    def clear(self) -> None:
        self.s.clear()
        self.y.clear()
        self.rho.clear()

    def __len__(self) -> int:
        return len(self.s)


def lbfgs_direction(grad: np.ndarray, history: LbfgsHistory) -> np.ndarray:
    """Two-loop recursion; with an empty history this is steepest descent."""
    q = grad.copy()
    alphas = []
    for s, y, rho in zip(reversed(history.s), reversed(history.y), reversed(history.rho)):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if len(history):
        s, y = history.s[-1], history.y[-1]
        gamma = (s @ y) / (y @ y)
        q *= gamma
    for (s, y, rho), a in zip(
        zip(history.s, history.y, history.rho), reversed(alphas)
    ):
        b = rho * (y @ q)
        q += s * (a - b)
    return -q


@dataclass
class LbfgsResult:
    x: np.ndarray
    loss: float
    grad: np.ndarray
    step_size: float
    line_search_failed: bool = False


def lbfgs_step(
    x: np.ndarray,
    value_and_grad,
    history: LbfgsHistory,
    lr: float = 1.0,
    c1: float = 1e-4,
    shrink: float = 0.5,
    max_trials: int = 25,
    f0: float | None = None,
    g0: np.ndarray | None = None,
) -> LbfgsResult:
    """One quasi-Newton step with Armijo backtracking.

    ``value_and_grad(x)`` must be a deterministic full-batch objective.
    When the line search exhausts its trials the step falls back to a
    small gradient-descent move and the history is flushed.
    """
    if f0 is None or g0 is None:
        f0, g0 = value_and_grad(x)
    d = lbfgs_direction(g0, history)
    slope = float(g0 @ d)
    if slope >= 0.0:  # not a descent direction; restart from steepest descent
        history.clear()
        d = -g0
        slope = float(g0 @ d)
    if len(history):
        step = lr
    else:  # steepest-descent start: scale the trial to the gradient size
        step = lr * min(1.0, 1.0 / (np.abs(g0).sum() + 1e-12))
    for _ in range(max_trials):
        x_new = x + step * d
        f_new, g_new = value_and_grad(x_new)
        if np.isfinite(f_new) and f_new <= f0 + c1 * step * slope:
            history.push(x_new - x, g_new - g0)
            return LbfgsResult(x_new, f_new, g_new, step)
        step *= shrink
    history.clear()
    fallback = lr * shrink**max_trials
    x_new = x - fallback * g0
    f_new, g_new = value_and_grad(x_new)
    return LbfgsResult(x_new, f_new, g_new, fallback, line_search_failed=True)
