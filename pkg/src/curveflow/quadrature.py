"""Gauss-Legendre quadrature over the spans of a periodic knot vector.

The energies and weak forms are integrals over [a, b] of span-wise smooth
integrands; each span gets the same q-point Gauss rule, with nodes strictly
inside the span so discontinuous top derivatives at knots are never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QuadratureRule", "gauss_legendre", "span_nodes", "integrate_spans"]

MAX_POINTS = 32


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """q-point rule on the reference interval (-1, 1); exact for degree 2q-1."""

    q: int
    nodes: np.ndarray
    weights: np.ndarray


def gauss_legendre(q: int) -> QuadratureRule:
    """Nodes and weights of the q-point Gauss-Legendre rule, 1 <= q <= 32."""
    if not (isinstance(q, (int, np.integer)) and 1 <= q <= MAX_POINTS):
        raise ValueError(f"quadrature points must satisfy 1 <= q <= {MAX_POINTS}, got {q!r}")
    nodes, weights = np.polynomial.legendre.leggauss(int(q))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(q=int(q), nodes=nodes, weights=weights)


def span_nodes(knots, rule: QuadratureRule):
    """Mapped nodes and weights, shape (N, q), over the N interior spans."""
    starts = knots.a + np.arange(knots.N) * knots.h
    half = 0.5 * knots.h
    zetas = starts[:, None] + (rule.nodes[None, :] + 1.0) * half
    weights = np.broadcast_to(rule.weights * half, zetas.shape).copy()
    return zetas, weights


def integrate_spans(f, knots, rule: QuadratureRule) -> float:
    """Integrate a span-wise smooth scalar f over [a, b], span by span."""
    zetas, weights = span_nodes(knots, rule)
    values = np.array([f(z) for z in zetas.ravel()])
    return float(np.dot(weights.ravel(), values))
