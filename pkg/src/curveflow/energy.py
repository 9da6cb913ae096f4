"""Energy densities over curve jets and their discrete partial derivatives.

A geometric energy E[u] = int F ds is rewritten over the fixed parameter
interval as E[u] = int_0^1 G(u, u_z, ..., d^m u) dzeta with G = F * |u_z|.
The time integrator does not use the classical gradient of G; it uses
two-point "discrete partials" DP_j(u, v), vector fields satisfying the exact
difference identity

    G(u-jet) - G(v-jet) = sum_{j=0..m} DP_j(u, v) . (d^j u - d^j v)

with no remainder.  Tested against the step difference in the weak form,
this identity is what forces the energy to decrease at every time step.
The identity does not pin DP_j down uniquely; the representatives below are
the ones obtained from explicit difference splittings of each density, which
are division-free in (u - v) and therefore stay finite at coincident
arguments, where they reduce to the classical partial derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bspline import ClosedBSplineCurve, CurveJet, regularity_floor, span_collocation
from .errors import DegenerateCurveError
from .quadrature import QuadratureRule

__all__ = [
    "DiscretePartials",
    "EnergyDensity",
    "length_density",
    "elastic_density",
    "length_discrete_partials",
    "elastic_discrete_partials",
    "length_energy",
    "elastic_energy",
    "make_energy",
    "total_energy",
]


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _perp(v):
    # Counterclockwise quarter turn: (x, y) -> (-y, x).
    return np.stack((-v[..., 1], v[..., 0]), axis=-1)


def _speed(d):
    return np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)


@dataclass(frozen=True, eq=False)
class DiscretePartials:
    """Vector-valued partials DP_j for orders j = 0..m at one jet pair."""

    partials: tuple

    @property
    def m(self) -> int:
        return len(self.partials) - 1

    def order(self, j: int) -> np.ndarray:
        return self.partials[j]

    def pair_with(self, jet_u: CurveJet, jet_v: CurveJet) -> float:
        """Evaluate sum_j DP_j . (d^j u - d^j v); equals G(u) - G(v)."""
        diffs = (
            jet_u.position - jet_v.position,
            jet_u.d1 - jet_v.d1,
            jet_u.d2 - jet_v.d2,
        )
        return float(sum(float(np.dot(p, d)) for p, d in zip(self.partials, diffs)))


@dataclass(frozen=True, eq=False)
class EnergyDensity:
    """A density G over jets together with its discrete partials.

    `m` is the highest derivative order G uses (1 for the length density,
    2 for the bending one).  `density_on_arrays` and `partials_on_arrays`
    are broadcasting kernels over stacked jets; `partials_on_arrays` returns
    one entry per order 0..m, with None marking an identically zero order.
    Any new density must come with a difference-identity property test.
    """

    kind: str
    m: int
    epsilon: float
    density: Callable[[CurveJet], float]
    discrete_partials: Callable[[CurveJet, CurveJet], DiscretePartials]
    density_on_arrays: Callable[[np.ndarray, Optional[np.ndarray]], np.ndarray]
    partials_on_arrays: Callable[..., tuple]


def length_density(jet: CurveJet) -> float:
    """Line-element density |u_zeta|."""
    return float(np.hypot(jet.d1[0], jet.d1[1]))


def elastic_density(jet: CurveJet, epsilon: float) -> float:
    """Bending-plus-length density eps^2 det(u_z, u_zz)^2 / |u_z|^5 + |u_z|.

    Integrated over [0, 1] this is eps^2 int kappa^2 ds + int ds; the steady
    states are circles of radius eps (energy 4 pi eps) and the eight-shaped
    curve at scale eps.
    """
    s = float(np.hypot(jet.d1[0], jet.d1[1]))
    if s == 0.0:
        raise DegenerateCurveError("elastic density needs a nonzero tangent")
    det = float(_cross(jet.d1, jet.d2))
    return float(epsilon) ** 2 * det * det / s**5 + s


def _length_partials_arrays(d1u, d1v):
    ssum = _speed(d1u) + _speed(d1v)
    return (d1u + d1v) / ssum[..., None]


def length_discrete_partials(jet_u: CurveJet, jet_v: CurveJet) -> DiscretePartials:
    """Discrete partials of |u_zeta|: order 1 is (u_z + v_z)/(|u_z| + |v_z|).

    Follows from |u_z| - |v_z| = (u_z + v_z) . (u_z - v_z) / (|u_z| + |v_z|),
    an exact identity whenever the denominator is nonzero.
    """
    if np.hypot(*jet_u.d1) + np.hypot(*jet_v.d1) == 0.0:
        raise DegenerateCurveError("both jets have zero tangent")
    dp1 = _length_partials_arrays(jet_u.d1.astype(float), jet_v.d1.astype(float))
    return DiscretePartials((np.zeros(2), dp1))


def _elastic_partials_arrays(d1u, d2u, d1v, d2v, epsilon):
    """Order-1 and order-2 discrete partials of the bending-plus-length density.

    The bending difference is split into two exactly factorable pieces:

      det_u^2 - det_v^2, over |u_z|^5, factored as (det_u + det_v) times a
      bracket that is linear in the first/second-derivative differences; its
      difference coefficients give
          order 1: (det_u + det_v)/|u_z|^5 * ( v_zz2, -v_zz1)
          order 2: (det_u + det_v)/|u_z|^5 * (-u_z2,   u_z1)

      det_v^2 (|u_z|^{-5} - |v_z|^{-5}), where the speed difference is
      written as a rational multiple of (u_z + v_z).(u_z - v_z), giving
          order 1: -det_v^2 * S * (u_z + v_z)
      with S = sum_{k=0..4} |u_z|^{8-2k}|v_z|^{2k} /
               (|u_z|^5 |v_z|^5 (|u_z|^5 + |v_z|^5)).

    The length partial (u_z + v_z)/(|u_z| + |v_z|) is added on top.  The
    power sum is evaluated by Horner's rule in the squared speeds so large
    derivative magnitudes do not overflow prematurely.
    """
    su = _speed(d1u)
    sv = _speed(d1v)
    su2 = su * su
    sv2 = sv * sv
    su5 = su2 * su2 * su
    sv5 = sv2 * sv2 * sv
    det_u = _cross(d1u, d2u)
    det_v = _cross(d1v, d2v)

    amp = (det_u + det_v) / su5
    psum = sv2 * sv2 * sv2 * sv2 + su2 * (sv2 * sv2 * sv2 + su2 * (sv2 * sv2 + su2 * (sv2 + su2)))
    sfac = psum / (su5 * sv5 * (su5 + sv5))
    dsum = d1u + d1v

    eps2 = float(epsilon) ** 2
    dp1 = (
        eps2 * (-amp[..., None] * _perp(d2v) - (det_v * det_v * sfac)[..., None] * dsum)
        + dsum / (su + sv)[..., None]
    )
    dp2 = eps2 * amp[..., None] * _perp(d1u)
    return dp1, dp2


def elastic_discrete_partials(jet_u: CurveJet, jet_v: CurveJet, epsilon: float) -> DiscretePartials:
    """Discrete partials of the bending-plus-length density at a jet pair.

    Exact in real arithmetic for every pair of non-degenerate jets, and
    well defined at jet_u == jet_v, where the order-2 partial reduces to
    eps^2 (det_u + det_v) (-u_z2, u_z1) / |u_z|^5.
    """
    if np.hypot(*jet_u.d1) == 0.0 or np.hypot(*jet_v.d1) == 0.0:
        raise DegenerateCurveError("elastic discrete partials need nonzero tangents")
    dp1, dp2 = _elastic_partials_arrays(
        jet_u.d1.astype(float),
        jet_u.d2.astype(float),
        jet_v.d1.astype(float),
        jet_v.d2.astype(float),
        epsilon,
    )
    return DiscretePartials((np.zeros(2), dp1, dp2))


def length_energy() -> EnergyDensity:
    """Curve-length energy; its flow is the curvature (curve-shortening) flow."""

    def density_on_arrays(d1, d2=None):
        return _speed(d1)

    def partials_on_arrays(d1u, d2u, d1v, d2v):
        return (None, _length_partials_arrays(d1u, d1v))

    return EnergyDensity(
        kind="length",
        m=1,
        epsilon=0.0,
        density=length_density,
        discrete_partials=length_discrete_partials,
        density_on_arrays=density_on_arrays,
        partials_on_arrays=partials_on_arrays,
    )


def elastic_energy(epsilon: float) -> EnergyDensity:
    """Bending-plus-length energy eps^2 int kappa^2 ds + int ds."""
    epsilon = float(epsilon)
    if epsilon <= 0.0:
        raise ValueError(f"elastic energy needs epsilon > 0, got {epsilon}")

    def density_on_arrays(d1, d2):
        s = _speed(d1)
        det = _cross(d1, d2)
        return epsilon**2 * det * det / s**5 + s

    def partials_on_arrays(d1u, d2u, d1v, d2v):
        dp1, dp2 = _elastic_partials_arrays(d1u, d2u, d1v, d2v, epsilon)
        return (None, dp1, dp2)

    def density(jet):
        return elastic_density(jet, epsilon)

    def discrete_partials(jet_u, jet_v):
        return elastic_discrete_partials(jet_u, jet_v, epsilon)

    return EnergyDensity(
        kind="elastic",
        m=2,
        epsilon=epsilon,
        density=density,
        discrete_partials=discrete_partials,
        density_on_arrays=density_on_arrays,
        partials_on_arrays=partials_on_arrays,
    )


def make_energy(kind: str, epsilon: float | None = None) -> EnergyDensity:
    """Config-facing selector: {kind: "length"} or {kind: "elastic", epsilon}."""
    if kind == "length":
        return length_energy()
    if kind == "elastic":
        if epsilon is None:
            raise ValueError("elastic energy requires epsilon")
        return elastic_energy(epsilon)
    raise ValueError(f"unknown energy kind {kind!r}")


def total_energy(curve: ClosedBSplineCurve, density: EnergyDensity, rule: QuadratureRule) -> float:
    """Integrate the density over the curve with the shared span quadrature."""
    knots = curve.knots
    if knots.p < density.m + 1:
        raise ValueError(
            f"energy of order m={density.m} needs degree p >= {density.m + 1}, got p={knots.p}"
        )
    _, w, mats = span_collocation(knots, rule, density.m)
    d1 = mats[1] @ curve.control_points
    speeds = _speed(d1)
    if speeds.min() <= regularity_floor(curve):
        raise DegenerateCurveError("degenerate tangent at a quadrature node")
    d2 = mats[2] @ curve.control_points if density.m >= 2 else None
    return float(np.dot(w, density.density_on_arrays(d1, d2)))
