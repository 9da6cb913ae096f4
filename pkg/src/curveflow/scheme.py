"""The fully discretized dissipative step and the time-stepping loop.

One step solves, for the new control points, the Galerkin system

    int ds-weight * (u_new - u_old)/dt . B_i e_c dzeta
      + sum_j int DP_j(u_new, u_old) . d^j(B_i e_c) dzeta  =  0

for every periodic basis function B_i and component c, where DP_j are the
discrete partials of the energy density and the ds-weight is, by default,
the speed of the average curve (u_new + u_old)/2.  Because the discrete
partials satisfy an exact difference identity, plugging the step difference
back into the solved system yields the energy balance

    (E[u_new] - E[u_old])/dt = -int ds-weight |(u_new - u_old)/dt|^2 dzeta

up to the Newton residual, so the energy never increases between control
point eliminations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bspline import (
    ClosedBSplineCurve,
    make_uniform_periodic_knots,
    regularity_floor,
    span_collocation,
)
from .energy import EnergyDensity, _speed, total_energy
from .errors import (
    DegenerateCurveError,
    FlowAbortedError,
    NonConvergenceError,
    SingularJacobianError,
)
from .geometry import bending_integral, dissipation_rhs, turning_index
from .quadrature import QuadratureRule, gauss_legendre

__all__ = [
    "NewtonConfig",
    "FlowState",
    "ResidualSystem",
    "assemble_residual",
    "residual_system",
    "solve_step",
    "initial_timestep",
    "next_timestep",
    "eliminate_close_points",
    "run_flow",
]

ELIMINATION_FACTOR = 0.1
ELIMINATION_FLOOR = 0.05


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10          # residual max-norm at acceptance
    max_iter: int = 50
    retry_max: int = 8          # dt halvings before a run aborts


@dataclass(frozen=True, eq=False)
class FlowState:
    """One accepted frame of a flow run."""

    n: int
    t: float
    dt: float
    curve: ClosedBSplineCurve
    energy: float
    dissipation_lhs: float
    dissipation_rhs: float
    turning_number: int
    turning_value: float
    last_slope: float
    eliminations: int

    @property
    def N(self) -> int:
        return self.curve.N

    @property
    def control_points(self) -> np.ndarray:
        return self.curve.control_points


class _Assembler:
    """Precomputed tables for one spline space, rule, and energy density."""

    def __init__(self, knots, rule: QuadratureRule, density: EnergyDensity, line_element: str):
        if knots.p < density.m + 1:
            raise ValueError(
                f"scheme with m={density.m} needs degree p >= {density.m + 1}, got p={knots.p}"
            )
        if line_element not in ("mid", "old", "new"):
            raise ValueError(f"unknown line element choice {line_element!r}")
        self.knots = knots
        self.density = density
        self.line_element = line_element
        _, w, mats = span_collocation(knots, rule, density.m)
        self.w = w
        self.mats = mats
        # Test-function tables with the quadrature weights folded in.
        self.wmats = tuple(m * w[:, None] for m in mats)
        self._old = None

    def set_old(self, u_old: ClosedBSplineCurve):
        P = u_old.control_points
        jets = [m @ P for m in self.mats]
        s1 = _speed(jets[1])
        floor = regularity_floor(u_old)
        if s1.min() <= floor:
            raise DegenerateCurveError("previous curve is degenerate at a quadrature node")
        self._old = (jets, s1, floor)

    def residual_batch(self, X: np.ndarray, dt: float) -> np.ndarray:
        """Residuals for a batch of flattened control-point vectors (B, 2N)."""
        jets_o, s1o, floor = self._old
        B = X.shape[0]
        P = X.reshape(B, self.knots.N, 2)
        d = [np.einsum("mi,bic->bmc", m, P) for m in self.mats]
        s1 = _speed(d[1])
        if s1.min() <= floor:
            raise DegenerateCurveError("degenerate tangent at a quadrature node")
        if self.line_element == "mid":
            sel = _speed(0.5 * (d[1] + jets_o[1]))
        elif self.line_element == "old":
            sel = np.broadcast_to(s1o, s1.shape)
        else:
            sel = s1
        if sel.min() <= floor:
            raise DegenerateCurveError("degenerate ds-weight at a quadrature node")

        vel = (d[0] - jets_o[0]) / dt
        R = np.einsum("mi,bmc->bic", self.wmats[0], sel[..., None] * vel)
        parts = self.density.partials_on_arrays(
            d[1], d[2] if self.density.m >= 2 else None, jets_o[1],
            jets_o[2] if self.density.m >= 2 else None,
        )
        for j, pj in enumerate(parts):
            if pj is not None:
                pj = np.broadcast_to(pj, (B,) + pj.shape[-2:])
                R += np.einsum("mi,bmc->bic", self.wmats[j], pj)
        return R.reshape(B, 2 * self.knots.N)

    def residual(self, u_new_points: np.ndarray, dt: float) -> np.ndarray:
        return self.residual_batch(u_new_points.reshape(1, -1), dt)[0]


def assemble_residual(
    u_new: ClosedBSplineCurve,
    u_old: ClosedBSplineCurve,
    dt: float,
    density: EnergyDensity,
    rule: QuadratureRule,
    line_element: str = "mid",
) -> np.ndarray:
    """Residual of the discrete step, one entry per (control point, component).

    Entry 2*i + c is the weak form tested with B_{p,i+1} e_c.  The residual
    vanishes exactly at the scheme solution.
    """
    if not u_new.knots.same_space(u_old.knots):
        raise ValueError("u_new and u_old live in different spline spaces")
    asm = _Assembler(u_old.knots, rule, density, line_element)
    asm.set_old(u_old)
    return asm.residual(u_new.control_points.ravel(), dt)


@dataclass(frozen=True, eq=False)
class ResidualSystem:
    """The nonlinear system of one step: 2N unknowns and their residual map.

    `unknowns` is the initial guess (the flattened control points of the
    previous curve), `residual` maps a candidate vector to the 2N weak-form
    residuals, and `residual_batch` evaluates a stack of candidates at once
    (used for the finite-difference Jacobian).
    """

    unknowns: np.ndarray
    dt: float
    residual: Callable[[np.ndarray], np.ndarray]
    residual_batch: Callable[[np.ndarray], np.ndarray]


def residual_system(
    u_old: ClosedBSplineCurve,
    dt: float,
    density: EnergyDensity,
    rule: QuadratureRule,
    line_element: str = "mid",
) -> ResidualSystem:
    """Bundle the step system solved by the Newton iteration."""
    asm = _Assembler(u_old.knots, rule, density, line_element)
    asm.set_old(u_old)
    dt = float(dt)
    return ResidualSystem(
        unknowns=u_old.control_points.ravel().copy(),
        dt=dt,
        residual=lambda x: asm.residual(np.asarray(x, dtype=float), dt),
        residual_batch=lambda X: asm.residual_batch(np.asarray(X, dtype=float), dt),
    )


_SQRT_EPS = math.sqrt(np.finfo(float).eps)
_MAX_HALVINGS = 30


def _newton(system: ResidualSystem, cfg: NewtonConfig) -> np.ndarray:
    x = system.unknowns.copy()
    r = system.residual(x)
    rnorm = float(np.max(np.abs(r)))
    n = x.size
    for _ in range(cfg.max_iter):
        if rnorm <= cfg.tol:
            return x
        # Forward-difference Jacobian, one column per unknown, batched.
        deltas = _SQRT_EPS * (1.0 + np.abs(x))
        Xp = np.repeat(x[None, :], n, axis=0)
        Xp[np.arange(n), np.arange(n)] += deltas
        J = (system.residual_batch(Xp) - r).T / deltas
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(f"linear solve failed: {exc}") from exc
        scale = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            try:
                rt = system.residual(x + scale * step)
            except DegenerateCurveError:
                scale *= 0.5
                continue
            rtnorm = float(np.max(np.abs(rt)))
            if rtnorm < rnorm:
                x = x + scale * step
                r, rnorm = rt, rtnorm
                break
            scale *= 0.5
        else:
            raise NonConvergenceError(
                f"line search stalled with residual max-norm {rnorm:.3e}"
            )
    if rnorm <= cfg.tol:
        return x
    raise NonConvergenceError(
        f"no convergence after {cfg.max_iter} iterations (residual {rnorm:.3e})"
    )


def solve_step(
    u_old: ClosedBSplineCurve,
    dt: float,
    density: EnergyDensity,
    rule: QuadratureRule,
    newton: Optional[NewtonConfig] = None,
    line_element: str = "mid",
) -> ClosedBSplineCurve:
    """Advance one time step by Newton iteration started at u_old.

    Raises NonConvergenceError when the iteration stalls or runs out of
    iterations (the caller should retry with a smaller dt) and
    SingularJacobianError when the linearized system cannot be solved.
    """
    cfg = newton or NewtonConfig()
    system = residual_system(u_old, dt, density, rule, line_element)
    x = _newton(system, cfg)
    return u_old.with_control_points(x.reshape(-1, 2))


def initial_timestep(curve: ClosedBSplineCurve, tau: float, rule: QuadratureRule) -> float:
    """First increment tau * min{1, 100 / int kappa^2 ds} of a run."""
    if tau <= 0:
        raise ValueError(f"base increment tau must be positive, got {tau}")
    bending = bending_integral(curve, rule)
    if bending == 0.0:
        return float(tau)
    return float(tau) * min(1.0, 100.0 / bending)


def next_timestep(prev_slope: float, tau: float) -> float:
    """Subsequent increment tau * min{1, 100 / slope^2} from the last energy rate."""
    if prev_slope == 0.0:
        return float(tau)
    return float(tau) * min(1.0, 100.0 / prev_slope**2)


def eliminate_close_points(
    curve: ClosedBSplineCurve,
    epsilon: float,
    factor: float = ELIMINATION_FACTOR,
    floor: float = ELIMINATION_FLOOR,
) -> ClosedBSplineCurve:
    """Remove control points whose cyclic neighbor is closer than the threshold.

    The threshold is factor * max(epsilon, floor).  Scanning by index, the
    later point of the first violating pair is dropped, the uniform periodic
    knot vector is rebuilt with one span fewer over the same interval, and
    the scan restarts; this repeats until no pair violates the threshold or
    only degree + 1 control points remain (a curve cannot shrink below that).
    This is what lets the flow change topology: a collapsing loop concentrates
    control points until the spline simply no longer represents it.
    """
    threshold = factor * max(float(epsilon), floor)
    knots = curve.knots
    points = [pt for pt in curve.control_points]
    removed = False
    while len(points) > knots.p + 1:
        victim = None
        n = len(points)
        for i in range(n):
            gap = points[(i + 1) % n] - points[i]
            if float(np.hypot(gap[0], gap[1])) < threshold:
                victim = (i + 1) % n
                break
        if victim is None:
            break
        del points[victim]
        removed = True
    if not removed:
        return curve
    new_knots = make_uniform_periodic_knots(knots.a, knots.b, knots.p, len(points))
    return ClosedBSplineCurve(new_knots, np.array(points))


def _frame(n, t, dt, curve, energy, lhs, rhs, rule, slope, eliminations) -> FlowState:
    raw = turning_index(curve, rule)
    return FlowState(
        n=n,
        t=t,
        dt=dt,
        curve=curve,
        energy=energy,
        dissipation_lhs=lhs,
        dissipation_rhs=rhs,
        turning_number=int(round(raw)),
        turning_value=raw,
        last_slope=slope,
        eliminations=eliminations,
    )


def run_flow(config) -> list:
    """Run a configured flow until t_end or a steady state; returns the frames.

    Per step: pick dt from the adaptive rule, solve the dissipative step
    (halving dt up to newton.retry_max times on non-convergence), optionally
    eliminate close control points, and record a frame.  The run counts as
    steady once the control-point velocity max-norm stays below steady.tol
    for steady.steps consecutive steps.  Raises FlowAbortedError (with the
    frames accepted so far) when retries are exhausted.
    """
    from .config import RunConfig
    from .shapes import build_initial_curve

    if not isinstance(config, RunConfig):
        raise TypeError(f"run_flow expects a RunConfig, got {type(config).__name__}")

    rule = gauss_legendre(config.quadrature_points)
    density = config.energy_density()
    newton = NewtonConfig(
        tol=config.newton.tol, max_iter=config.newton.max_iter, retry_max=config.newton.retry_max
    )
    curve = build_initial_curve(config.initial, config.degree, config.spans)

    energy = total_energy(curve, density, rule)
    frames = [_frame(0, 0.0, 0.0, curve, energy, 0.0, 0.0, rule, 0.0, 0)]

    t = 0.0
    n = 0
    slope = None
    eliminations = 0
    steady_run = 0
    while t < config.t_end:
        if slope is None:
            dt = initial_timestep(curve, config.tau, rule)
        else:
            dt = next_timestep(slope, config.tau)

        attempts = 0
        while True:
            try:
                new_curve = solve_step(curve, dt, density, rule, newton, config.line_element)
                break
            except (NonConvergenceError, DegenerateCurveError, SingularJacobianError) as exc:
                attempts += 1
                if attempts > newton.retry_max:
                    raise FlowAbortedError(
                        f"step {n + 1} failed after {attempts - 1} dt halvings: {exc}",
                        frames=frames,
                    ) from exc
                dt *= 0.5

        new_energy = total_energy(new_curve, density, rule)
        lhs = (new_energy - energy) / dt
        rhs = dissipation_rhs(curve, new_curve, dt, rule, config.line_element)
        velocity = float(
            np.max(np.abs(new_curve.control_points - curve.control_points))
        ) / dt

        if config.elimination.enabled:
            trimmed = eliminate_close_points(
                new_curve,
                epsilon=density.epsilon,
                factor=config.elimination.factor,
                floor=config.elimination.floor,
            )
            if trimmed.N != new_curve.N:
                eliminations += new_curve.N - trimmed.N
                new_curve = trimmed
                new_energy = total_energy(new_curve, density, rule)

        t += dt
        n += 1
        slope = (new_energy - energy) / dt
        frames.append(
            _frame(n, t, dt, new_curve, new_energy, lhs, rhs, rule, slope, eliminations)
        )
        curve, energy = new_curve, new_energy

        steady_run = steady_run + 1 if velocity < config.steady.tol else 0
        if steady_run >= config.steady.steps:
            break
    return frames
