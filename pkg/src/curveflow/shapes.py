"""Parametric initial-curve library.

Closed test shapes are produced as ordered point samples and least-squares
fitted into the spline space; the solver itself never sees the parametric
formulas.  Each generator takes a sample count and an overall scale.
"""

from __future__ import annotations

import numpy as np

from .bspline import ClosedBSplineCurve, fit_closed_curve, make_uniform_periodic_knots
from .errors import ConfigError

__all__ = ["SHAPES", "sample_shape", "build_initial_curve"]


def _angles(count: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(count) / count


def circle_samples(count: int, scale: float = 1.0) -> np.ndarray:
    th = _angles(count)
    return scale * np.column_stack((np.cos(th), np.sin(th)))


def figure_eight_samples(count: int, scale: float = 1.0) -> np.ndarray:
    """Lemniscate (cos t, sin t cos t)/(1 + sin^2 t): two opposite loops, turning 0."""
    th = _angles(count)
    den = 1.0 + np.sin(th) ** 2
    return scale * np.column_stack((np.cos(th) / den, np.sin(th) * np.cos(th) / den))


def double_loop_samples(count: int, scale: float = 1.0) -> np.ndarray:
    """Cardioid-like curve r = 0.5 + cos t with a large inner loop; turning 2."""
    th = _angles(count)
    r = 0.5 + np.cos(th)
    return scale * np.column_stack((r * np.cos(th), r * np.sin(th)))


def limacon_samples(count: int, scale: float = 1.0) -> np.ndarray:
    """Limacon r = 1 + 1.25 cos t with a small inner loop; turning 2."""
    th = _angles(count)
    r = 1.0 + 1.25 * np.cos(th)
    return scale * np.column_stack((r * np.cos(th), r * np.sin(th)))


def petal_samples(count: int, scale: float = 1.0) -> np.ndarray:
    """Epitrochoid-like multi-petal curve with three crossing loops; turning 4."""
    th = _angles(count)
    z = np.exp(1j * th) + 0.55 * np.exp(4j * th)
    return scale * np.column_stack((z.real, z.imag))


def counter_curl_samples(count: int, scale: float = 1.0) -> np.ndarray:
    """Self-crossing curve with a pair of opposite curls and turning number 1.

    Built from the tangent angle phi(t) = t + 1.2 sin(2t): the half-period
    antisymmetry phi(t + pi) = phi(t) + pi closes the curve, the net angle
    gain is 2 pi, and the intervals where phi decreases fold the curve into
    two counter-rotating loops.
    """
    th = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
    phi = th + 1.2 * np.sin(2.0 * th)
    tang = np.column_stack((np.cos(phi), np.sin(phi)))
    dt = 2.0 * np.pi / count
    # Cumulative trapezoid of the unit tangent; spectrally accurate closure.
    pts = np.vstack((np.zeros(2), np.cumsum(0.5 * (tang[1:] + tang[:-1]) * dt, axis=0)))
    pts -= pts.mean(axis=0)
    return scale * pts


SHAPES = {
    "circle": circle_samples,
    "figure_eight": figure_eight_samples,
    "double_loop": double_loop_samples,
    "limacon": limacon_samples,
    "petal": petal_samples,
    "counter_curl": counter_curl_samples,
}


def sample_shape(name: str, scale: float = 1.0, count: int = 400) -> np.ndarray:
    try:
        generator = SHAPES[name]
    except KeyError:
        raise ConfigError(
            f"unknown initial preset {name!r}; available: {', '.join(sorted(SHAPES))}"
        ) from None
    return generator(count, scale)


def build_initial_curve(initial, degree: int, spans: int) -> ClosedBSplineCurve:
    """Realize a configured initial condition as a closed B-spline curve."""
    if initial.control_points is not None:
        knots = make_uniform_periodic_knots(0.0, 1.0, degree, spans)
        return ClosedBSplineCurve(knots, np.asarray(initial.control_points, dtype=float))
    if initial.samples is not None:
        return fit_closed_curve(np.asarray(initial.samples, dtype=float), degree, spans)
    pts = sample_shape(initial.preset, initial.scale, count=max(240, 20 * spans))
    return fit_closed_curve(pts, degree, spans)
