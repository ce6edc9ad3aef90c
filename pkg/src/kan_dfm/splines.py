"""Univariate B-spline bases with analytic derivatives.

Every learnable edge in the network is a linear combination of B-spline
basis functions over a fixed uniform knot grid. The grid spans a base
interval (the normalized feature domain) and is extended by ``order_k``
uniformly spaced knots on each side so that evaluation stays well defined
slightly beyond the base interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class KnotVector:
    """Uniform extended knot grid for degree-``order_k`` B-splines.

    ``knots`` has length ``grid_size + 2*order_k + 1`` and supports
    ``grid_size + order_k`` basis functions. The base interval is
    ``[knots[order_k], knots[-order_k - 1]]``.
    """

    knots: np.ndarray
    order_k: int
    grid_size: int

    def __post_init__(self) -> None:
        knots = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "knots", knots)
        if self.order_k < 0 or self.grid_size < 1:
            raise ValueError("grid_size must be >= 1 and order_k >= 0")
        expected = self.grid_size + 2 * self.order_k + 1
        if knots.ndim != 1 or knots.size != expected:
            raise ValueError(
                f"knot vector must have length {expected}, got {knots.size}"
            )
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be non-decreasing")

    @property
    def n_basis(self) -> int:
        return self.grid_size + self.order_k

    @property
    def domain(self) -> tuple[float, float]:
        k = self.order_k
        return float(self.knots[k]), float(self.knots[-k - 1])

    @property
    def extended_span(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])


def build_knot_vector(
    grid_size: int, order_k: int, domain_lo: float, domain_hi: float
) -> KnotVector:
    """Uniform knots over ``[domain_lo, domain_hi]`` with ``order_k``
    extension knots continuing the same spacing on each side."""
    if grid_size < 1 or order_k < 1:
        raise ValueError("grid_size and order_k must be >= 1")
    if not domain_lo < domain_hi:
        raise ValueError("domain_lo must be < domain_hi")
    h = (domain_hi - domain_lo) / grid_size
    n = grid_size + 2 * order_k + 1
    knots = domain_lo + h * (np.arange(n) - order_k)
    return KnotVector(knots=knots, order_k=order_k, grid_size=grid_size)


def _check_in_span(kv: KnotVector, x: np.ndarray) -> None:
    lo, hi = kv.extended_span
    if np.any(x < lo) or np.any(x > hi):
        raise ValueError(
            f"input outside extended knot span [{lo}, {hi}]; clamp before evaluating"
        )


def _basis_levels(kv: KnotVector, x: np.ndarray) -> list[np.ndarray]:
    """Degree-by-degree Cox-de Boor table for a batch of points.

    Returns per-degree matrices ``levels[d]`` of shape
    ``(len(x), len(knots) - d - 1)``; the last one holds the degree-k
    basis values. Intervals are half open, with the global right end
    assigned to the last interval so left limits are returned there.
    """
    t = kv.knots
    k = kv.order_k
    n_int = t.size - 1
    idx = np.searchsorted(t, x, side="right") - 1
    idx = np.clip(idx, 0, n_int - 1)
    b0 = np.zeros((x.size, n_int))
    b0[np.arange(x.size), idx] = 1.0
    levels = [b0]
    for d in range(1, k + 1):
        prev = levels[-1]
        m = n_int - d
        left = (x[:, None] - t[None, :m]) / (t[d : d + m] - t[:m])
        right = (t[None, d + 1 : d + 1 + m] - x[:, None]) / (t[d + 1 : d + 1 + m] - t[1 : 1 + m])
        levels.append(left * prev[:, :m] + right * prev[:, 1 : m + 1])
    return levels


def basis_matrix(kv: KnotVector, x: np.ndarray) -> np.ndarray:
    """All basis values at each point: shape ``(len(x), n_basis)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _check_in_span(kv, x)
    return _basis_levels(kv, x)[-1]


def basis_and_derivative_matrix(
    kv: KnotVector, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Basis values and their x-derivatives in one pass.

    The derivative uses the standard recurrence
    ``B'_{m,k} = k * (B_{m,k-1}/(t_{m+k}-t_m) - B_{m+1,k-1}/(t_{m+k+1}-t_{m+1}))``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _check_in_span(kv, x)
    levels = _basis_levels(kv, x)
    vals = levels[-1]
    k = kv.order_k
    if k == 0:
        return vals, np.zeros_like(vals)
    t = kv.knots
    low = levels[k - 1]
    m = kv.n_basis
    d_left = low[:, :m] / (t[k : k + m] - t[:m])
    d_right = low[:, 1 : m + 1] / (t[k + 1 : k + 1 + m] - t[1 : 1 + m])
    return vals, k * (d_left - d_right)


def basis_values(kv: KnotVector, x: float) -> np.ndarray:
    """Basis values ``B_1..B_M`` at a single point."""
    return basis_matrix(kv, np.array([x]))[0]


def basis_derivatives(kv: KnotVector, x: float) -> np.ndarray:
    """Analytic derivatives ``dB_m/dx`` at a single point."""
    return basis_and_derivative_matrix(kv, np.array([x]))[1][0]


@dataclass
class SplineEdge:
    """One learnable univariate function: coefficients over a knot vector."""

    knot_vector: KnotVector
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=float)
        self.coefficients = c
        if c.shape != (self.knot_vector.n_basis,):
            raise ValueError(
                f"expected {self.knot_vector.n_basis} coefficients, got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")


def edge_eval(edge: SplineEdge, x: float) -> float:
    """phi(x) = sum_m c_m B_m(x)."""
    return float(basis_values(edge.knot_vector, x) @ edge.coefficients)


def edge_grad(edge: SplineEdge, x: float) -> tuple[float, np.ndarray]:
    """Returns (d phi/dx, d phi/dc) at ``x``; the coefficient gradient is
    simply the basis values."""
    vals, derivs = basis_and_derivative_matrix(edge.knot_vector, np.array([x]))
    return float(derivs[0] @ edge.coefficients), vals[0]
