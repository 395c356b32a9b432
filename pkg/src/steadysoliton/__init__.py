"""Steady gradient soliton profiles on complex line bundles.

The profile functions a (circle fiber scale), b (sphere scale), and the
potential f satisfy a second-order system degenerate at s = 0.  This
package starts trajectories with an origin power series, integrates
them with an embedded Runge-Kutta pair, classifies the outcome by the
shape ratio Q = a/b, bisects the boundary datum f''(0) for the critical
trajectory between regimes, and verifies every run against conserved
quantities, a closed-form oracle, and predicted tail asymptotics.
"""

from .asymptotics import (
    DecayReport,
    TailFit,
    default_tail_window,
    fit_sqrt_growth,
    limit_fprime,
    predicted_fprime_limit,
    predicted_slopes,
    verify_decay,
)
from .checks import CheckRecord, CheckReport, run_checks
from .cli import write_trajectory
from .classify import (
    ClassLabel,
    Classification,
    EscapeRecord,
    ShootResult,
    SweepPoint,
    band_escape,
    boundary_interval,
    classify,
    classify_f0,
    shoot_critical,
    sweep,
)
from .cone import (
    CaseCheck,
    ConeCase,
    ConeCaseLabel,
    bryant_for_dimension,
    conformance,
    detect_cone_case,
    run_cone_case,
)
from .errors import (
    BadDimension,
    BracketInvalid,
    DegenerateState,
    Inconclusive,
    InvalidCase,
    MismatchedParams,
    NoSignChange,
    NotApplicable,
    NotCollapsed,
    OutOfDomain,
    OutOfRadius,
    ResonanceFailure,
    SolitonError,
    WindowTooShort,
)
from .integrator import (
    DenseOutput,
    EventKind,
    EventRecord,
    IntegrationControls,
    Terminal,
    Trajectory,
    integrate,
    locate_event,
)
from .model import (
    Branch,
    Diagnostics,
    ModelParams,
    ShootConfig,
    SolitonState,
    diagnostics,
    eval_rhs,
    first_integral_constant,
    q_ratio,
)
from .pagepope import (
    ErrorReport,
    PagePopeSolution,
    compare_oracle,
    pagepope_arclength,
    pagepope_profiles,
    pagepope_solution,
)
from .series import (
    SeriesJet,
    build_cone_jet,
    build_line_bundle_jet,
    evaluate_jet,
    jet_residual,
    origin_diagnostics,
)

__version__ = "0.1.0"

__all__ = [
    "BadDimension",
    "Branch",
    "BracketInvalid",
    "CaseCheck",
    "CheckRecord",
    "CheckReport",
    "ClassLabel",
    "Classification",
    "ConeCase",
    "ConeCaseLabel",
    "DecayReport",
    "DegenerateState",
    "DenseOutput",
    "Diagnostics",
    "ErrorReport",
    "EscapeRecord",
    "EventKind",
    "EventRecord",
    "Inconclusive",
    "IntegrationControls",
    "InvalidCase",
    "MismatchedParams",
    "ModelParams",
    "NoSignChange",
    "NotApplicable",
    "NotCollapsed",
    "OutOfDomain",
    "OutOfRadius",
    "PagePopeSolution",
    "ResonanceFailure",
    "SeriesJet",
    "ShootConfig",
    "ShootResult",
    "SolitonError",
    "SolitonState",
    "SweepPoint",
    "TailFit",
    "Terminal",
    "Trajectory",
    "WindowTooShort",
    "band_escape",
    "boundary_interval",
    "bryant_for_dimension",
    "build_cone_jet",
    "build_line_bundle_jet",
    "classify",
    "classify_f0",
    "compare_oracle",
    "conformance",
    "default_tail_window",
    "detect_cone_case",
    "diagnostics",
    "eval_rhs",
    "evaluate_jet",
    "first_integral_constant",
    "fit_sqrt_growth",
    "integrate",
    "jet_residual",
    "limit_fprime",
    "locate_event",
    "origin_diagnostics",
    "pagepope_arclength",
    "pagepope_profiles",
    "pagepope_solution",
    "predicted_fprime_limit",
    "predicted_slopes",
    "q_ratio",
    "run_checks",
    "run_cone_case",
    "shoot_critical",
    "sweep",
    "verify_decay",
    "write_trajectory",
]
