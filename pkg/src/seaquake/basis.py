"""Gauss-Lobatto-Legendre quadrature and nodal Lagrange bases on [-1, 1].

GLL points serve both as interpolation nodes and quadrature points, which is
what makes every mass matrix in the assembled systems diagonal.  A rule of
order P (P+1 points, endpoints included) integrates polynomials of degree
up to 2P-1 exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

MAX_ORDER = 16


def _legendre_and_deriv(n: int, x):
    """Evaluate P_n(x) and P_n'(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(1, n):
        p_next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        p_prev, p = p, p_next
    # derivative from the standard identity (valid away from |x| = 1)
    dp = np.where(
        np.isclose(np.abs(x), 1.0),
        0.5 * n * (n + 1) * np.sign(x) ** (n + 1),
        n * (x * p - p_prev) / np.where(np.isclose(np.abs(x), 1.0), 1.0, x * x - 1.0),
    )
    return p, dp


@dataclass(frozen=True)
class QuadratureRule1D:
    """GLL nodes and weights for polynomial order ``order``."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.nodes) != self.order + 1 or len(self.weights) != self.order + 1:
            raise ConfigurationError("rule arrays must have order+1 entries")


@dataclass(frozen=True)
class DiffMatrix:
    """Nodal differentiation matrix: entries[i, j] = L_j'(node_i)."""

    entries: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.entries.shape[0] - 1


def gll_rule(order: int) -> QuadratureRule1D:
    """Build the GLL quadrature rule of the given polynomial order.

    Nodes are the roots of (1-x^2) P_order'(x), found by Newton iteration
    from Chebyshev-Lobatto initial guesses.  Weights follow the closed form
    2 / (order (order+1) P_order(x_i)^2).
    """
    if not isinstance(order, (int, np.integer)):
        raise ConfigurationError(f"order must be an integer, got {order!r}")
    if order < 1 or order > MAX_ORDER:
        raise ConfigurationError(
            f"polynomial order must be in [1, {MAX_ORDER}], got {order}"
        )
    n = order
    nodes = np.empty(n + 1)
    nodes[0], nodes[n] = -1.0, 1.0
    if n >= 2:
        # interior nodes: roots of P_n'; Chebyshev-Lobatto points start close
        x = -np.cos(np.pi * np.arange(1, n) / n)
        for _ in range(100):
            p, dp = _legendre_and_deriv(n, x)
            # Newton on P_n'(x); P_n'' from Legendre's ODE:
            # (1-x^2) P'' = 2 x P' - n(n+1) P
            d2p = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x)
            dx = dp / d2p
            x = x - dx
            if np.max(np.abs(dx)) < 1e-14:
                break
        else:
            raise ConfigurationError(f"GLL Newton iteration stalled for order {n}")
        nodes[1:n] = np.sort(x)
    p_at_nodes, _ = _legendre_and_deriv(n, nodes)
    weights = 2.0 / (n * (n + 1) * p_at_nodes**2)
    return QuadratureRule1D(order=n, nodes=nodes, weights=weights)


def lagrange_values(nodes: np.ndarray, x: float) -> np.ndarray:
    """Values of the nodal Lagrange basis at a point x."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    vals = np.ones(n)
    for i in range(n):
        for j in range(n):
            if i != j:
                vals[i] *= (x - nodes[j]) / (nodes[i] - nodes[j])
    return vals


def diff_matrix(rule: QuadratureRule1D) -> DiffMatrix:
    """Differentiation matrix of the Lagrange basis on the rule's nodes.

    Uses the barycentric form; rows sum to zero because constants have zero
    derivative.
    """
    x = rule.nodes
    n = len(x)
    # barycentric weights
    w = np.ones(n)
    for i in range(n):
        for j in range(n):
            if i != j:
                w[i] /= x[i] - x[j]
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d[i, j] = (w[j] / w[i]) / (x[i] - x[j])
        d[i, i] = -np.sum(d[i, :])
    return DiffMatrix(entries=d)
