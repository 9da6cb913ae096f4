"""Geometric diagnostics of closed B-spline curves.

Scalar curvature, length, bending, turning number, and the per-step
dissipation audit.  Everything is pure and reads only curve snapshots.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bspline import ClosedBSplineCurve, CurveJet, regularity_floor, span_collocation
from .energy import EnergyDensity, _cross, _speed, total_energy
from .errors import DegenerateCurveError
from .quadrature import QuadratureRule

__all__ = [
    "CurveDiagnostics",
    "signed_curvature",
    "curve_length",
    "bending_integral",
    "turning_index",
    "turning_number",
    "min_adjacent_distance",
    "dissipation_rhs",
    "dissipation_audit",
    "curve_diagnostics",
]

log = logging.getLogger(__name__)

TURNING_INTEGRALITY_TOL = 1e-3


def signed_curvature(jet: CurveJet) -> float:
    """Scalar curvature det(u_z, u_zz) / |u_z|^3; sign follows orientation."""
    s = float(np.hypot(jet.d1[0], jet.d1[1]))
    if s == 0.0:
        raise DegenerateCurveError("curvature of a degenerate jet")
    return float(_cross(jet.d1, jet.d2)) / s**3


def _speeds_and_dets(curve: ClosedBSplineCurve, rule: QuadratureRule):
    _, w, mats = span_collocation(curve.knots, rule, 2)
    d1 = mats[1] @ curve.control_points
    d2 = mats[2] @ curve.control_points
    s = _speed(d1)
    if s.min() <= regularity_floor(curve):
        raise DegenerateCurveError("degenerate tangent at a quadrature node")
    return w, s, _cross(d1, d2)


def curve_length(curve: ClosedBSplineCurve, rule: QuadratureRule) -> float:
    _, w, mats = span_collocation(curve.knots, rule, 1)
    return float(np.dot(w, _speed(mats[1] @ curve.control_points)))


def bending_integral(curve: ClosedBSplineCurve, rule: QuadratureRule) -> float:
    """int kappa^2 ds = int det(u_z, u_zz)^2 / |u_z|^5 dzeta."""
    w, s, det = _speeds_and_dets(curve, rule)
    return float(np.dot(w, det * det / s**5))


def turning_index(curve: ClosedBSplineCurve, rule: QuadratureRule) -> float:
    """Unrounded winding of the tangent, (1/2pi) int kappa ds."""
    w, s, det = _speeds_and_dets(curve, rule)
    return float(np.dot(w, det / (s * s))) / (2.0 * np.pi)


def turning_number(curve: ClosedBSplineCurve, rule: QuadratureRule) -> int:
    """Rounded turning index; non-integral values are logged, not fatal.

    Near a numerical topology change the quadrature can momentarily blur the
    integral, so a large deviation from an integer is only a warning.
    """
    raw = turning_index(curve, rule)
    nearest = round(raw)
    if abs(raw - nearest) > TURNING_INTEGRALITY_TOL:
        log.warning("turning index %.6f is not close to an integer", raw)
    return int(nearest)


def min_adjacent_distance(curve: ClosedBSplineCurve) -> float:
    """Minimum over cyclically adjacent control-point pairs of |P_{i+1} - P_i|."""
    P = curve.control_points
    return float(np.min(np.hypot(*(np.roll(P, -1, axis=0) - P).T)))


def _midline_speed(d1_old, d1_new, line_element: str):
    if line_element == "mid":
        return _speed(0.5 * (d1_old + d1_new))
    if line_element == "old":
        return _speed(d1_old)
    if line_element == "new":
        return _speed(d1_new)
    raise ValueError(f"unknown line element choice {line_element!r}")


def dissipation_rhs(
    u_old: ClosedBSplineCurve,
    u_new: ClosedBSplineCurve,
    dt: float,
    rule: QuadratureRule,
    line_element: str = "mid",
) -> float:
    """-int ds-weight * |(u_new - u_old)/dt|^2 dzeta, always <= 0."""
    if not u_old.knots.same_space(u_new.knots):
        raise ValueError("curves live in different spline spaces")
    _, w, mats = span_collocation(u_old.knots, rule, 1)
    d0o = mats[0] @ u_old.control_points
    d0n = mats[0] @ u_new.control_points
    d1o = mats[1] @ u_old.control_points
    d1n = mats[1] @ u_new.control_points
    vel = (d0n - d0o) / dt
    sel = _midline_speed(d1o, d1n, line_element)
    return -float(np.dot(w, sel * np.sum(vel * vel, axis=-1)))


def dissipation_audit(
    u_old: ClosedBSplineCurve,
    u_new: ClosedBSplineCurve,
    dt: float,
    density: EnergyDensity,
    rule: QuadratureRule,
    line_element: str = "mid",
):
    """(lhs, rhs) of the per-step energy identity; |lhs - rhs| should be tiny.

    lhs = (E[u_new] - E[u_old]) / dt, rhs = the (negative) weighted velocity
    square.  At a converged step the two agree up to solver and quadrature
    error; in particular the energy cannot increase.
    """
    lhs = (total_energy(u_new, density, rule) - total_energy(u_old, density, rule)) / dt
    rhs = dissipation_rhs(u_old, u_new, dt, rule, line_element)
    return lhs, rhs


@dataclass(frozen=True)
class CurveDiagnostics:
    length: float
    bending: float
    energy: float
    turning_number: int
    min_adjacent_cp_distance: float


def curve_diagnostics(
    curve: ClosedBSplineCurve, density: EnergyDensity, rule: QuadratureRule
) -> CurveDiagnostics:
    return CurveDiagnostics(
        length=curve_length(curve, rule),
        bending=bending_integral(curve, rule),
        energy=total_energy(curve, density, rule),
        turning_number=turning_number(curve, rule),
        min_adjacent_cp_distance=min_adjacent_distance(curve),
    )
