"""Energy-dissipative gradient flows of closed planar B-spline curves."""

from .bspline import (
    ClosedBSplineCurve,
    CurveJet,
    KnotVector,
    basis_eval,
    collocation_matrix,
    curve_eval,
    curve_samples,
    fit_closed_curve,
    jet_at,
    make_uniform_periodic_knots,
    periodic_basis_eval,
)
from .config import (
    RunConfig,
    builtin_presets,
    parse_config,
    preset_config,
)
from .energy import (
    DiscretePartials,
    EnergyDensity,
    elastic_density,
    elastic_discrete_partials,
    elastic_energy,
    length_density,
    length_discrete_partials,
    length_energy,
    make_energy,
    total_energy,
)
from .errors import (
    ConfigError,
    CurveFlowError,
    DegenerateCurveError,
    FlowAbortedError,
    NonConvergenceError,
    SingularJacobianError,
)
from .geometry import (
    CurveDiagnostics,
    curve_diagnostics,
    dissipation_audit,
    min_adjacent_distance,
    signed_curvature,
    turning_index,
    turning_number,
)
from .output import (
    CanvasConfig,
    control_polygon_record,
    curve_from_polygon_record,
    emit_energy_csv,
    emit_frames,
    load_frames,
    render_report,
    render_svg,
)
from .quadrature import QuadratureRule, gauss_legendre, integrate_spans
from .scheme import (
    FlowState,
    NewtonConfig,
    ResidualSystem,
    assemble_residual,
    residual_system,
    eliminate_close_points,
    initial_timestep,
    next_timestep,
    run_flow,
    solve_step,
)
from .shapes import build_initial_curve, sample_shape

__version__ = "0.1.0"
