"""Trajectory regime classification and critical-slope shooting.

A line-bundle trajectory either sends the shape ratio Q = a/b above 1
(after which it increases forever and the profile blows up) or produces
an interior maximum of Q below 1 (after which Q decays to zero).  Both
outcomes are stable certificates, so classification is a binary oracle
and the critical initial potential curvature f0* sits at the boundary:
bisection on f0 with {low: Collapsed, high: Crossing} endpoints.

Near f0* trajectories shadow Q = 1 before committing, and the shadowing
length grows as the bracket shrinks, so classification escalates sMax
by doubling until a certificate appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import BracketInvalid, Inconclusive, NotApplicable
from .integrator import (EventKind, EventRecord, IntegrationControls,
                         Terminal, Trajectory, integrate)
from .model import Branch, ModelParams, ShootConfig
from .series import SeriesJet, build_line_bundle_jet

__all__ = [
    "ClassLabel",
    "Classification",
    "classify",
    "ShootResult",
    "EscapeRecord",
    "shoot_critical",
    "band_escape",
    "SweepPoint",
    "sweep",
    "boundary_interval",
]

DELTA_CROSS = 1e-9
DELTA_COL = 1e-9

# doubling cap for certificate escalation: near-critical interior maxima
# arrive at s growing like an inverse power of the bracket width, which
# outruns small caps long before bracket width 1e-10
MAX_DOUBLINGS = 12


class ClassLabel(Enum):
    CROSSING = "Crossing"
    COLLAPSED = "Collapsed"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True, slots=True)
class Classification:
    label: ClassLabel
    witness: EventRecord | Terminal
    q_max_seen: float

    def to_json(self) -> dict:
        if isinstance(self.witness, EventRecord):
            w = {"event": self.witness.kind.value, "s": self.witness.s,
                 "Q": self.witness.state.a / self.witness.state.b}
        else:
            w = {"terminal": self.witness.value}
        return {"label": self.label.value, "witness": w,
                "QmaxSeen": self.q_max_seen}


def _event_q(e: EventRecord) -> float:
    return e.state.a / e.state.b


def _event_dq(e: EventRecord) -> float:
    st = e.state
    return (st.da - (st.a / st.b) * st.db) / st.b


def classify(trajectory: Trajectory,
             delta_cross: float = DELTA_CROSS,
             delta_col: float = DELTA_COL) -> Classification:
    """Label one trajectory by its Q certificates.

    Crossing: some sample has Q >= 1 + delta_cross, or an upward
    QCrossesOne event fired.  Collapsed: a QTurnsDown event fired with
    Q < 1 and the maximum is confirmed below 1 - delta_col (at the
    event itself or by a later sample; near the critical slope the
    maximum can graze the guard band while the decay below it is
    unambiguous).  If stray certificates of both kinds appear, the
    final sample's side of the band decides, since genuine certificates
    are permanent.  Otherwise Undetermined.
    """
    samples = trajectory.samples
    qs = [st.a / st.b for st in samples]
    q_max = max(qs)

    cross_events = [e for e in trajectory.events
                    if e.kind is EventKind.Q_CROSSES_ONE
                    and _event_dq(e) > 0.0]
    has_cross = bool(cross_events) or q_max >= 1.0 + delta_cross

    col_events = []
    for e in trajectory.events:
        if e.kind is not EventKind.Q_TURNS_DOWN or _event_q(e) >= 1.0:
            continue
        confirmed = _event_q(e) <= 1.0 - delta_col or any(
            q <= 1.0 - delta_col
            for st, q in zip(samples, qs) if st.s >= e.s)
        if confirmed:
            col_events.append(e)
    has_col = bool(col_events)

    if has_cross and has_col:
        q_end = qs[-1]
        if q_end >= 1.0 + delta_cross:
            has_col = False
        elif q_end <= 1.0 - delta_col:
            has_cross = False

    if has_cross and not has_col:
        witness = cross_events[0] if cross_events else trajectory.terminal
        return Classification(ClassLabel.CROSSING, witness, q_max)
    if has_col and not has_cross:
        return Classification(ClassLabel.COLLAPSED, col_events[0], q_max)
    return Classification(ClassLabel.UNDETERMINED, trajectory.terminal,
                          q_max)


def _integrate_f0(params: ModelParams, f0: float,
                  controls: IntegrationControls,
                  order: int = 10) -> Trajectory:
    cfg = ShootConfig.line_bundle(f0)
    jet = build_line_bundle_jet(params, cfg, order=order)
    return integrate(jet, params, cfg, controls)


def classify_f0(params: ModelParams, f0: float,
                controls: IntegrationControls,
                max_doublings: int = MAX_DOUBLINGS
                ) -> tuple[Classification, Trajectory]:
    """Classify with sMax doubling until a certificate appears."""
    trajectory = _integrate_f0(params, f0, controls)
    cls = classify(trajectory)
    s_max = controls.s_max
    for _ in range(max_doublings):
        if cls.label is not ClassLabel.UNDETERMINED:
            break
        s_max *= 2.0
        trajectory = _integrate_f0(params, f0,
                                   replace(controls, s_max=s_max))
        cls = classify(trajectory)
    return cls, trajectory


@dataclass(frozen=True, slots=True)
class EscapeRecord:
    """How long a near-critical run shadows the band |Q - 1| <= band."""

    bracket_width_target: float
    bracket_width: float
    f0: float
    band: float
    enter_s: float
    escape_s: float
    s_max_used: float
    censored: bool  # no exit before the extension cap

    @property
    def span(self) -> float:
        return self.escape_s - self.enter_s

    def to_json(self) -> dict:
        return {
            "bracketWidthTarget": self.bracket_width_target,
            "bracketWidth": self.bracket_width,
            "f0": self.f0,
            "band": self.band,
            "enterS": self.enter_s,
            "escapeS": self.escape_s,
            "span": self.span,
            "sMaxUsed": self.s_max_used,
            "censored": self.censored,
        }


def band_escape(params: ModelParams, f0: float,
                controls: IntegrationControls,
                band: float = 0.1,
                width_target: float = math.nan,
                width: float = math.nan,
                max_doublings: int = 14) -> EscapeRecord:
    """First exit of |Q - 1| <= band after entry, extending sMax as
    needed; purely diagnostic (classification never consults this)."""
    s_max = controls.s_max
    for attempt in range(max_doublings + 1):
        tr = _integrate_f0(params, f0, replace(controls, s_max=s_max))
        enter_s = math.nan
        for st in tr.samples:
            q = st.a / st.b
            if math.isnan(enter_s):
                if abs(q - 1.0) <= band:
                    enter_s = st.s
            elif abs(q - 1.0) > band:
                return EscapeRecord(width_target, width, f0, band,
                                    enter_s, st.s, s_max, False)
        if tr.terminal is not Terminal.REACHED_S_MAX:
            # degenerated without leaving the band; report the end point
            return EscapeRecord(width_target, width, f0, band, enter_s,
                                tr.samples[-1].s, s_max, True)
        if attempt < max_doublings:
            s_max *= 2.0
    return EscapeRecord(width_target, width, f0, band, enter_s, math.inf,
                        s_max, True)


@dataclass(frozen=True, slots=True)
class ShootResult:
    f0_low: float
    f0_high: float
    f0_star: float
    iterations: int
    critical_trajectory: Trajectory
    escapes: tuple[EscapeRecord, ...]
    anomalies: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "f0Low": self.f0_low,
            "f0High": self.f0_high,
            "f0Star": self.f0_star,
            "iterations": self.iterations,
            "escapes": [e.to_json() for e in self.escapes],
            "anomalies": list(self.anomalies),
        }


_ESCAPE_WIDTHS = (1e-4, 1e-6, 1e-8, 1e-10)


def shoot_critical(params: ModelParams,
                   controls: IntegrationControls | None = None,
                   bracket_init: tuple[float, float] = (-10.0, 0.0),
                   tol_f0: float = 1e-10,
                   record_escapes: bool = True) -> ShootResult:
    """Bisect f0 between Collapsed and Crossing regimes.

    The bracket invariant {low: Collapsed, high: Crossing} is re-checked
    every iteration by re-running the classifier over the stored
    endpoint trajectories; violations are logged as anomalies rather
    than raised, since regime monotonicity in f0 is an observed
    property, not a guarantee.  At selected bracket widths the current
    midpoint's
    shadowing span of |Q - 1| <= 0.1 is recorded.
    """
    if params.branch is not Branch.LINE_BUNDLE:
        raise NotApplicable("shooting runs on the line-bundle branch only")
    if params.a1 <= params.n + 1.0:
        raise NotApplicable(
            f"critical slope exists only for a1 > n+1 "
            f"(a1={params.a1}, n={params.n})")
    if controls is None:
        controls = IntegrationControls()
    f0_low, f0_high = bracket_init
    if not (f0_low < f0_high <= 0.0):
        raise BracketInvalid(
            f"need f0_low < f0_high <= 0, got [{f0_low}, {f0_high}]")

    cls_low, traj_low = classify_f0(params, f0_low, controls)
    cls_high, traj_high = classify_f0(params, f0_high, controls)
    if cls_low.label is not ClassLabel.COLLAPSED \
            or cls_high.label is not ClassLabel.CROSSING:
        raise BracketInvalid(
            f"bracket endpoints classify as ({cls_low.label.value}, "
            f"{cls_high.label.value}); need (Collapsed, Crossing)")

    anomalies: list[str] = []
    escapes: list[EscapeRecord] = []
    pending = list(_ESCAPE_WIDTHS)
    iterations = 0
    traj_mid = None

    while f0_high - f0_low > tol_f0 and iterations < 200:
        width = f0_high - f0_low
        mid = 0.5 * (f0_low + f0_high)
        while pending and width <= pending[0]:
            target = pending.pop(0)
            if record_escapes:
                escapes.append(band_escape(params, mid, controls,
                                           width_target=target,
                                           width=width))
        cls_mid, traj_mid = classify_f0(params, mid, controls)
        if cls_mid.label is ClassLabel.UNDETERMINED:
            raise Inconclusive(
                f"midpoint f0={mid} undetermined at the sMax doubling cap"
                f" (bracket width {width:.3e})")
        if cls_mid.label is ClassLabel.COLLAPSED:
            f0_low, traj_low = mid, traj_mid
        else:
            f0_high, traj_high = mid, traj_mid
        iterations += 1

        # bracket soundness: re-verify stored endpoint trajectories
        re_low = classify(traj_low)
        re_high = classify(traj_high)
        if re_low.label is not ClassLabel.COLLAPSED:
            anomalies.append(
                f"iteration {iterations}: low endpoint f0={f0_low} "
                f"re-classified as {re_low.label.value}")
        if re_high.label is not ClassLabel.CROSSING:
            anomalies.append(
                f"iteration {iterations}: high endpoint f0={f0_high} "
                f"re-classified as {re_high.label.value}")

    width = f0_high - f0_low
    mid = 0.5 * (f0_low + f0_high)
    while pending and width <= pending[0]:
        target = pending.pop(0)
        if record_escapes:
            escapes.append(band_escape(params, mid, controls,
                                       width_target=target, width=width))
    if traj_mid is None or traj_mid.cfg.f0 != mid:
        # fresh midpoint run, escalated until it shows its certificate
        _, traj_mid = classify_f0(params, mid, controls)
    return ShootResult(f0_low=f0_low, f0_high=f0_high, f0_star=mid,
                       iterations=iterations,
                       critical_trajectory=traj_mid,
                       escapes=tuple(escapes),
                       anomalies=tuple(anomalies))


@dataclass(frozen=True, slots=True)
class SweepPoint:
    f0: float
    classification: Classification

    def to_json(self) -> dict:
        return {"f0": self.f0, **self.classification.to_json()}


def sweep(params: ModelParams, f0_grid: list[float],
          controls: IntegrationControls | None = None) -> list[SweepPoint]:
    """Classify each grid point; the grid runs from 0 downward."""
    if controls is None:
        controls = IntegrationControls()
    if any(f0_grid[i] <= f0_grid[i + 1] for i in range(len(f0_grid) - 1)):
        raise BracketInvalid("sweep grid must be strictly decreasing")
    out = []
    for f0 in f0_grid:
        cls, _ = classify_f0(params, f0, controls)
        out.append(SweepPoint(f0=f0, classification=cls))
    return out


def boundary_interval(points: list[SweepPoint]
                      ) -> tuple[tuple[float, float] | None, list[str]]:
    """Empirical regime boundary and any non-single-switch violations.

    Returns ((largest Collapsed f0, smallest Crossing f0), violations);
    the interval is None if either regime never appears.
    """
    violations = []
    labels = [p.classification.label for p in points]
    switches = [i for i in range(len(points) - 1)
                if labels[i] is not labels[i + 1]]
    if len(switches) > 1:
        violations.append(
            "multiple regime switches at f0 "
            + ", ".join(f"{points[i].f0}->{points[i + 1].f0}"
                        for i in switches))
    for i, lab in enumerate(labels):
        if lab is ClassLabel.UNDETERMINED:
            violations.append(f"undetermined grid point f0={points[i].f0}")
    cross = [p.f0 for p in points
             if p.classification.label is ClassLabel.CROSSING]
    col = [p.f0 for p in points
           if p.classification.label is ClassLabel.COLLAPSED]
    if not cross or not col:
        return None, violations
    return (max(col), min(cross)), violations
