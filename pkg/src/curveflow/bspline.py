"""Periodic B-spline bases and closed planar B-spline curves.

The spline space lives on a uniform knot vector over a parameter interval
[a, b] that extends p spans past each end.  Basis functions whose support
crosses the seam are glued into C^{p-1} periodic functions, so a closed
curve is a plain linear combination of N periodic basis functions with N
planar control points.  All values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCurveError

__all__ = [
    "KnotVector",
    "ClosedBSplineCurve",
    "CurveJet",
    "make_uniform_periodic_knots",
    "basis_eval",
    "periodic_basis_eval",
    "curve_eval",
    "curve_samples",
    "jet_at",
    "fit_closed_curve",
    "collocation_matrix",
    "span_collocation",
    "regularity_floor",
]

# |u_zeta| below this multiple of the control-polygon perimeter is treated
# as a degenerate parametrization (the energy densities divide by |u_zeta|^5).
REGULARITY_FLOOR_FACTOR = 1e-10


@dataclass(frozen=True, eq=False)
class KnotVector:
    """Uniform periodic knot sequence: xi_i = a + (i - p - 1) h, i = 1..N+2p+1."""

    a: float
    b: float
    p: int
    N: int
    h: float
    knots: np.ndarray

    def wrap(self, zeta: float) -> float:
        """Reduce zeta periodically into [a, b); b itself maps to a.

        Evaluating at the wrapped parameter gives the two seam endpoints one
        arithmetic path, so curves and their derivatives match there exactly.
        """
        return self.a + (zeta - self.a) % (self.b - self.a)

    def span_index(self, zeta: float) -> int:
        """Index k of the span [a + k h, a + (k+1) h] containing a wrapped zeta."""
        k = int((zeta - self.a) / self.h)
        return min(max(k, 0), self.N - 1)

    def same_space(self, other: "KnotVector") -> bool:
        return (
            self.a == other.a
            and self.b == other.b
            and self.p == other.p
            and self.N == other.N
        )


def make_uniform_periodic_knots(a: float, b: float, p: int, N: int) -> KnotVector:
    """Build the uniform periodic knot vector {a - p h, ..., b + p h}, h = (b-a)/N.

    Raises:
        ValueError: if N <= p (the seam gluing needs N > p) or b <= a.
    """
    if not (isinstance(p, (int, np.integer)) and p >= 1):
        raise ValueError(f"degree p must be a positive integer, got {p!r}")
    if not (isinstance(N, (int, np.integer)) and N > p):
        raise ValueError(f"span count N must exceed the degree (N > p): N={N!r}, p={p}")
    a = float(a)
    b = float(b)
    if not b > a:
        raise ValueError(f"parameter interval requires b > a, got [{a}, {b}]")
    p = int(p)
    N = int(N)
    h = (b - a) / N
    knots = a + (np.arange(1, N + 2 * p + 2, dtype=float) - p - 1) * h
    knots.setflags(write=False)
    return KnotVector(a=a, b=b, p=p, N=N, h=h, knots=knots)


def _basis_value(t: np.ndarray, p: int, i0: int, x: float) -> float:
    # Recursion over the degree; a term with a repeated knot is null.
    if p == 0:
        return 1.0 if t[i0] <= x < t[i0 + 1] else 0.0
    val = 0.0
    den = t[i0 + p] - t[i0]
    if den != 0.0:
        left = _basis_value(t, p - 1, i0, x)
        if left != 0.0:
            val += (x - t[i0]) / den * left
    den = t[i0 + p + 1] - t[i0 + 1]
    if den != 0.0:
        right = _basis_value(t, p - 1, i0 + 1, x)
        if right != 0.0:
            val += (t[i0 + p + 1] - x) / den * right
    return val


def _basis_derivative(t: np.ndarray, p: int, i0: int, x: float, order: int) -> float:
    # Derivatives reduce to differences of one-degree-lower bases; exact for
    # piecewise polynomials, no symbolic differentiation needed.
    if order == 0:
        return _basis_value(t, p, i0, x)
    if p == 0:
        return 0.0
    val = 0.0
    den = t[i0 + p] - t[i0]
    if den != 0.0:
        val += p / den * _basis_derivative(t, p - 1, i0, x, order - 1)
    den = t[i0 + p + 1] - t[i0 + 1]
    if den != 0.0:
        val -= p / den * _basis_derivative(t, p - 1, i0 + 1, x, order - 1)
    return val


def basis_eval(knots: KnotVector, i: int, zeta: float, order: int = 0) -> float:
    """Evaluate the i-th (1-based) non-periodic basis function or a derivative.

    The value is nonzero only on the support [xi_i, xi_{i+p+1}].  Valid
    indices are 1 <= i <= N + p; derivative orders run from 0 to p.
    """
    p = knots.p
    if not 0 <= order <= p:
        raise ValueError(f"derivative order must satisfy 0 <= order <= {p}, got {order}")
    if not 1 <= i <= knots.N + p:
        raise ValueError(f"basis index must satisfy 1 <= i <= {knots.N + p}, got {i}")
    return _basis_derivative(knots.knots, p, i - 1, float(zeta), order)


def periodic_basis_eval(knots: KnotVector, i: int, zeta: float, order: int = 0) -> float:
    """Evaluate the i-th (1-based, i <= N) glued periodic basis function.

    For i <= p the function is the non-periodic basis near the left end of
    [a, b] joined with its translate (index i + N) near the right end; the
    two pieces meet the seam with matching derivatives up to order p - 1.
    Any real zeta is accepted and wrapped into [a, b).
    """
    if not 1 <= i <= knots.N:
        raise ValueError(f"periodic basis index must satisfy 1 <= i <= {knots.N}, got {i}")
    z = knots.wrap(float(zeta))
    val = basis_eval(knots, i, z, order)
    if i <= knots.p:
        val += _basis_derivative(knots.knots, knots.p, i + knots.N - 1, z, order)
    return val


@dataclass(frozen=True, eq=False)
class ClosedBSplineCurve:
    """Closed degree-p curve u(zeta) = sum_i B_{p,i}(zeta) P_i with N control points."""

    knots: KnotVector
    control_points: np.ndarray

    def __post_init__(self):
        P = np.array(self.control_points, dtype=float)
        if P.shape != (self.knots.N, 2):
            raise ValueError(
                f"expected {self.knots.N} planar control points, got array of shape {P.shape}"
            )
        P.setflags(write=False)
        object.__setattr__(self, "control_points", P)

    @property
    def degree(self) -> int:
        return self.knots.p

    @property
    def N(self) -> int:
        return self.knots.N

    def with_control_points(self, P) -> "ClosedBSplineCurve":
        """New curve over the same knot vector."""
        return ClosedBSplineCurve(self.knots, P)


@dataclass(frozen=True, eq=False)
class CurveJet:
    """Point values (u, u_zeta, u_zetazeta) of a curve at one parameter."""

    position: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def regularity_floor(curve: ClosedBSplineCurve) -> float:
    """Smallest admissible |u_zeta| for this curve, tied to its length scale.

    A curve whose control polygon has zero perimeter (all points coincide)
    has no length scale at all and is rejected outright.
    """
    P = curve.control_points
    perimeter = float(np.sum(np.hypot(*(np.roll(P, -1, axis=0) - P).T)))
    if perimeter == 0.0:
        raise DegenerateCurveError("all control points coincide; the curve is a point")
    return REGULARITY_FLOOR_FACTOR * perimeter


def curve_eval(curve: ClosedBSplineCurve, zeta: float, order: int = 0) -> np.ndarray:
    """Point or derivative of the curve at zeta (wrapped into [a, b))."""
    knots = curve.knots
    z = knots.wrap(float(zeta))
    k = knots.span_index(z)
    out = np.zeros(2)
    for l in range(knots.p + 1):
        # On span k only the bases with 1-based indices k+1 .. k+p+1 are
        # nonzero; the glued periodic basis agrees with the plain one there.
        w = basis_eval(knots, k + l + 1, z, order)
        if w != 0.0:
            out += w * curve.control_points[(k + l) % knots.N]
    return out


def curve_samples(curve: ClosedBSplineCurve, count: int, order: int = 0) -> np.ndarray:
    """Curve (or derivative) at `count` parameters spread uniformly over [a, b)."""
    knots = curve.knots
    zetas = knots.a + (knots.b - knots.a) * np.arange(count) / count
    return collocation_matrix(knots, zetas, order) @ curve.control_points


def jet_at(curve: ClosedBSplineCurve, zeta: float) -> CurveJet:
    """Bundle (u, u_zeta, u_zetazeta) at zeta; rejects degenerate tangents."""
    pos = curve_eval(curve, zeta, 0)
    d1 = curve_eval(curve, zeta, 1)
    d2 = curve_eval(curve, zeta, 2)
    if np.hypot(d1[0], d1[1]) <= regularity_floor(curve):
        raise DegenerateCurveError(
            f"|u_zeta| = {np.hypot(d1[0], d1[1]):.3e} at zeta = {zeta} "
            "is below the regularity floor"
        )
    return CurveJet(position=pos, d1=d1, d2=d2)


def collocation_matrix(knots: KnotVector, zetas, order: int = 0) -> np.ndarray:
    """Matrix A with A[r, j] = (d/dzeta)^order B_{p,j+1} at zetas[r]."""
    zetas = np.asarray(zetas, dtype=float)
    A = np.zeros((zetas.size, knots.N))
    for r, zeta in enumerate(zetas.ravel()):
        z = knots.wrap(float(zeta))
        k = knots.span_index(z)
        for l in range(knots.p + 1):
            A[r, (k + l) % knots.N] += basis_eval(knots, k + l + 1, z, order)
    return A


_COLLOCATION_CACHE: dict = {}


def span_collocation(knots: KnotVector, rule, max_order: int):
    """Quadrature nodes, weights and basis tables shared by all integrals.

    Returns (zetas, weights, mats) where zetas/weights are flat arrays over
    the N*q quadrature nodes (q Gauss points per span, strictly interior so
    the only-C^{p-1} knot points are never touched) and mats[j] is the dense
    (N*q, N) table of order-j periodic basis values at those nodes.  Cached
    per (a, b, p, N, q, max_order); every consumer therefore integrates with
    the same node set, which is what makes the per-step energy identity hold
    at the discrete level.
    """
    key = (knots.a, knots.b, knots.p, knots.N, rule.q, max_order)
    hit = _COLLOCATION_CACHE.get(key)
    if hit is not None:
        return hit
    from .quadrature import span_nodes

    zetas, weights = span_nodes(knots, rule)
    zflat = zetas.ravel()
    wflat = weights.ravel().copy()
    mats = tuple(collocation_matrix(knots, zflat, j) for j in range(max_order + 1))
    for arr in (zflat, wflat, *mats):
        arr.setflags(write=False)
    _COLLOCATION_CACHE[key] = (zflat, wflat, mats)
    return zflat, wflat, mats


def fit_closed_curve(
    samples,
    degree: int,
    spans: int,
    a: float = 0.0,
    b: float = 1.0,
    return_residual: bool = False,
):
    """Least-squares closed B-spline through ordered samples of a closed curve.

    The M samples are matched at uniformly spaced parameters
    zeta_k = a + (k/M)(b - a).  Requires M >= spans > degree.  The fit
    residual (root-mean-square point distance) is returned alongside the
    curve when `return_residual` is set.

    Raises:
        ValueError: if M < spans (underdetermined).
        DegenerateCurveError: if the samples are coincident or collinear, so
            no regular closed curve can pass through them.
    """
    S = np.asarray(samples, dtype=float)
    if S.ndim != 2 or S.shape[1] != 2:
        raise ValueError(f"samples must be an (M, 2) array, got shape {S.shape}")
    M = S.shape[0]
    if M < spans:
        raise ValueError(f"need at least as many samples as control points: M={M} < N={spans}")
    knots = make_uniform_periodic_knots(a, b, degree, spans)

    centered = S - S.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= 1e-8 * sv[0]:
        raise DegenerateCurveError(
            "samples are coincident or collinear; they do not describe a closed curve"
        )

    zetas = a + (b - a) * np.arange(M) / M
    A = collocation_matrix(knots, zetas, 0)
    P, *_ = np.linalg.lstsq(A, S, rcond=None)
    curve = ClosedBSplineCurve(knots, P)

    speeds = np.hypot(*curve_samples(curve, 8 * spans, 1).T)
    if speeds.min() <= regularity_floor(curve):
        raise DegenerateCurveError(
            "fitted curve has a degenerate parametrization (vanishing tangent)"
        )
    if return_residual:
        residual = float(np.sqrt(np.mean(np.sum((A @ P - S) ** 2, axis=1))))
        return curve, residual
    return curve
