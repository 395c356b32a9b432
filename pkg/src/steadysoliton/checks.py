"""Named runtime checks of the flow's conservation and monotonicity laws.

Every integrated trajectory can be audited against the structural facts
the equations guarantee: the first integral of the potential, the
curvature identity it implies, monotonicity of the two scales, sign and
ordering constraints on the potential slope, and the behavior of the
shape ratio Q.  Each check reports its worst margin and the arclength of
the first violation, so a failing run is diagnosable from the summary
alone.

Two of the bounds need an amplitude-aware form.  The first integral and
the curvature identity are cancellations among terms whose combined
magnitude Theta can reach 1e13 near blow-up, where double precision
cannot represent the residual below eps * Theta and accumulated local
error scales as rtol * Theta.  The literal bounds are therefore asserted
on samples with Theta <= 1000 * (1 + |f0|), and an amplitude-scaled
bound 100 * rtol * (1 + |f0| + Theta) everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .integrator import EventKind, Terminal, Trajectory
from .model import Branch, first_integral_constant

__all__ = [
    "CheckRecord",
    "CheckReport",
    "run_checks",
]

_TAME_THETA_FACTOR = 1000.0
_DRIFT_FACTOR = 100.0
_IDENTITY_RTOL = 1e-8
_EARLY_BOUND_TOL = 1e-8
_GRADIENT_BOUND_TOL = 1e-8
_INTEGRAL_IDENTITY_RTOL = 1e-5
# Trapezoid error on a step whose integrand varies by e^v is ~(v/m)^2/12
# for m panels; v/m <= 0.006 keeps each step below 3e-6.
_INTEGRAL_LOG_STEP = 0.006
_INTEGRAL_MIN_PANELS = 4
_INTEGRAL_MAX_PANELS = 256
# Q ~ s^(-1/2) decay leaves committed collapsed tails near 0.1 at the
# default s_max = 60, so the advisory band must sit above that
_DICHOTOMY_BAND = 0.2
_UNIT_CRITICAL_TOL = 4.0 * np.finfo(float).eps


@dataclass(frozen=True, slots=True)
class CheckRecord:
    """Outcome of one named check.

    worst is the check's extremal measured value (what it is measuring
    is check-specific and stated in the name); flagged marks advisory
    observations that are not failures.
    """

    name: str
    passed: bool
    worst: float
    bound: float
    s_at_worst: float | None = None
    first_violation_s: float | None = None
    flagged: bool = False
    note: str = ""

    def to_json(self) -> dict:
        out: dict = {"name": self.name, "passed": self.passed,
                     "worst": self.worst, "bound": self.bound}
        if self.s_at_worst is not None:
            out["sAtWorst"] = self.s_at_worst
        if self.first_violation_s is not None:
            out["firstViolationS"] = self.first_violation_s
        if self.flagged:
            out["flagged"] = True
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True, slots=True)
class CheckReport:
    records: tuple[CheckRecord, ...] = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def to_json(self) -> dict:
        return {"allPassed": self.all_passed,
                "checks": [r.to_json() for r in self.records]}


def _theta(n: float, arr: dict, f0: float) -> np.ndarray:
    """Combined magnitude of the terms cancelling in the first integral
    and the curvature identity."""
    a, da, b, db, df = arr["a"], arr["da"], arr["b"], arr["db"], arr["df"]
    two_n = 2.0 * n
    return (two_n * a * a / b ** 4
            + two_n * (two_n + 2.0) / (b * b)
            + np.abs(4.0 * n * da * db / (a * b))
            + two_n * (two_n - 1.0) * (db / b) ** 2
            + 2.0 * np.abs(df) * (np.abs(da / a) + two_n * np.abs(db / b))
            + df * df + 2.0 * abs(f0))


def _worst(records: list[CheckRecord], name: str, values: np.ndarray,
           bound: float, s: np.ndarray, note: str = "") -> None:
    """Append a record for a check of the form max(values) <= bound."""
    if len(values) == 0:
        records.append(CheckRecord(name=name, passed=True, worst=math.nan,
                                   bound=bound, note=note or "no samples in scope"))
        return
    i = int(np.argmax(values))
    bad = np.nonzero(values > bound)[0]
    records.append(CheckRecord(
        name=name, passed=bad.size == 0, worst=float(values[i]), bound=bound,
        s_at_worst=float(s[i]),
        first_violation_s=float(s[bad[0]]) if bad.size else None,
        note=note))


def _drift_checks(tr: Trajectory, arr: dict, records: list[CheckRecord]) -> None:
    n = tr.params.n
    f0 = tr.cfg.f0
    rtol = tr.controls.rel_tol
    c = first_integral_constant(tr.params, tr.cfg)
    s = arr["s"]
    theta = _theta(n, arr, f0)
    tame = theta <= _TAME_THETA_FACTOR * (1.0 + abs(f0))
    h_abs = np.abs(arr["H"])
    lit_bound = _DRIFT_FACTOR * rtol * (1.0 + abs(f0))

    _worst(records, "first integral drift (tame samples)",
           h_abs[tame], lit_bound, s[tame])
    _worst(records, "first integral drift (amplitude scaled)",
           h_abs / (1.0 + abs(f0) + theta), _DRIFT_FACTOR * rtol, s)

    resid = np.abs(arr["R"] + c + arr["df"] ** 2)
    floor = 1.0 + abs(c) + arr["df"] ** 2
    _worst(records, "curvature identity (tame samples)",
           (resid / floor)[tame], _IDENTITY_RTOL, s[tame])
    _worst(records, "curvature identity (amplitude scaled)",
           resid / (1.0 + abs(f0) + theta), _DRIFT_FACTOR * rtol, s)


def _monotonicity_checks(tr: Trajectory, arr: dict,
                         records: list[CheckRecord]) -> None:
    n = tr.params.n
    s, a, da, db = arr["s"], arr["a"], arr["da"], arr["db"]

    # circle scale strictly increasing: da > 0 and samples ascending in a
    bad = np.nonzero((da <= 0.0) | np.concatenate(([False], np.diff(a) <= 0.0)))[0]
    i = int(np.argmin(da))
    records.append(CheckRecord(
        name="circle scale strictly increasing", passed=bad.size == 0,
        worst=float(da[i]), bound=0.0, s_at_worst=float(s[i]),
        first_violation_s=float(s[bad[0]]) if bad.size else None,
        note="worst is min of da; bound is exclusive"))

    # sphere scale increasing while Q below sqrt(n+1)
    below = arr["Q"] < math.sqrt(n + 1.0)
    if np.any(below):
        db_below = db[below]
        s_below = s[below]
        bad = np.nonzero(db_below <= 0.0)[0]
        i = int(np.argmin(db_below))
        records.append(CheckRecord(
            name="sphere scale increasing below shape threshold",
            passed=bad.size == 0, worst=float(db_below[i]), bound=0.0,
            s_at_worst=float(s_below[i]),
            first_violation_s=float(s_below[bad[0]]) if bad.size else None,
            note="worst is min of db on Q < sqrt(n+1); bound is exclusive"))

    # sphere slope changes sign at most once
    flips = np.nonzero(((db[:-1] > 0.0) & (db[1:] <= 0.0))
                       | ((db[:-1] < 0.0) & (db[1:] >= 0.0)))[0]
    records.append(CheckRecord(
        name="sphere slope single sign change", passed=flips.size <= 1,
        worst=float(flips.size), bound=1.0,
        first_violation_s=float(s[flips[1]]) if flips.size > 1 else None))


def _potential_checks(tr: Trajectory, arr: dict,
                      records: list[CheckRecord]) -> None:
    f0 = tr.cfg.f0
    rtol = tr.controls.rel_tol
    c = first_integral_constant(tr.params, tr.cfg)
    s, f, df, r = arr["s"], arr["f"], arr["df"], arr["R"]
    theta = _theta(tr.params.n, arr, f0)
    tame = theta <= _TAME_THETA_FACTOR * (1.0 + abs(f0))

    if f0 == 0.0:
        bound = _DRIFT_FACTOR * rtol * (1.0 + s[-1] ** 2)
        _worst(records, "potential stays flat (zero seed)",
               np.abs(f), bound, s)
        return

    # potential slope nonpositive, amplitude-aware like the drift bound
    _worst(records, "potential slope nonpositive (tame samples)",
           df[tame], _DRIFT_FACTOR * rtol * (1.0 + abs(f0)), s[tame])
    _worst(records, "potential slope nonpositive (amplitude scaled)",
           df / (1.0 + abs(f0) + theta), _DRIFT_FACTOR * rtol, s)

    # f strictly decreasing across samples
    diffs = np.diff(f)
    bad = np.nonzero(diffs >= 0.0)[0]
    i = int(np.argmax(diffs))
    records.append(CheckRecord(
        name="potential strictly decreasing", passed=bad.size == 0,
        worst=float(diffs[i]), bound=0.0, s_at_worst=float(s[i + 1]),
        first_violation_s=float(s[bad[0] + 1]) if bad.size else None,
        note="worst is max step of f; bound is exclusive"))

    # R strictly decreasing across samples
    diffs = np.diff(r)
    bad = np.nonzero(diffs >= 0.0)[0]
    i = int(np.argmax(diffs))
    records.append(CheckRecord(
        name="curvature strictly decreasing", passed=bad.size == 0,
        worst=float(diffs[i]), bound=0.0, s_at_worst=float(s[i + 1]),
        first_violation_s=float(s[bad[0] + 1]) if bad.size else None,
        note="worst is max step of R; bound is exclusive"))

    # slope bounded below by the tail limit while curvature is
    # nonnegative (beyond R = 0 the trajectory is already incomplete
    # and the identity df^2 = -C - R forces df past the limit)
    limit = -math.sqrt(-c)
    nonneg = r >= 0.0
    excess = (limit - df)[nonneg] / (1.0 + abs(f0) + theta[nonneg])
    _worst(records, "potential slope above tail limit while R >= 0",
           excess, _DRIFT_FACTOR * rtol, s[nonneg],
           note="worst is (limit - df) scaled by amplitude")


def _shape_checks(tr: Trajectory, arr: dict,
                  records: list[CheckRecord]) -> None:
    params = tr.params
    s, q, dq, b, f = arr["s"], arr["Q"], arr["dQ"], arr["b"], arr["f"]

    if params.branch is Branch.LINE_BUNDLE:
        a1 = params.a1
        early = s <= 1.0 / a1
        _worst(records, "early shape bound",
               (q - a1 * s)[early], _EARLY_BOUND_TOL, s[early])

        rising = (q >= 0.0) & (q <= 1.0) & (dq > 0.0)
        two_n = 2.0 * params.n
        envelope = a1 * np.exp(f) / b ** (two_n + 1.0)
        _worst(records, "shape gradient bound while rising below unity",
               (dq - envelope)[rising], _GRADIENT_BOUND_TOL, s[rising])


def _critical_point_check(tr: Trajectory, arr: dict,
                          records: list[CheckRecord]) -> None:
    cfg = tr.cfg
    if tr.params.branch is Branch.CONE and cfg.a0 == cfg.b0:
        records.append(CheckRecord(
            name="shape critical point law", passed=True, worst=math.nan,
            bound=0.0, note="diagonal seed exempt (Q is identically 1)"))
        return
    s, q, dq = arr["s"], arr["Q"], arr["dQ"]
    worst_gap = math.inf
    worst_s = None
    first_bad = None
    flagged = False
    note = ""
    for i in range(len(s) - 1):
        if dq[i] > 0.0 >= dq[i + 1]:
            kind = "max"
        elif dq[i] < 0.0 <= dq[i + 1]:
            kind = "min"
        else:
            continue
        qc = q[i + 1]
        gap = (1.0 - qc) if kind == "max" else (qc - 1.0)
        if gap < worst_gap:
            worst_gap, worst_s = gap, float(s[i + 1])
        if gap <= 0.0 and first_bad is None:
            first_bad = float(s[i + 1])
        if abs(qc - 1.0) <= _UNIT_CRITICAL_TOL:
            flagged = True
            note = f"critical point with Q = 1 to rounding at s={s[i + 1]}"
    records.append(CheckRecord(
        name="shape critical point law", passed=first_bad is None,
        worst=float(worst_gap) if worst_s is not None else math.nan,
        bound=0.0, s_at_worst=worst_s, first_violation_s=first_bad,
        flagged=flagged,
        note=note or "worst is min of (1-Q) at maxima / (Q-1) at minima;"
                     " bound is exclusive"))


def _dichotomy_check(tr: Trajectory, arr: dict,
                     records: list[CheckRecord]) -> None:
    if tr.terminal is not Terminal.REACHED_S_MAX:
        return
    s, q = arr["s"], arr["Q"]
    lo = max(s[-1] - (s[-1] - s[0]) / 3.0, 20.0)
    mask = s >= lo
    if int(mask.sum()) < 50:
        records.append(CheckRecord(
            name="shape limit dichotomy", passed=True, worst=math.nan,
            bound=_DICHOTOMY_BAND, note="run too short for a tail window"))
        return
    q_limit = float(np.mean(q[mask]))
    gap = min(abs(q_limit), abs(q_limit - 1.0))
    near = gap <= _DICHOTOMY_BAND
    records.append(CheckRecord(
        name="shape limit dichotomy", passed=True, worst=gap,
        bound=_DICHOTOMY_BAND, flagged=not near,
        note=f"tail Q mean {q_limit:.6g}"
             + ("" if near else " has not committed to 0 or 1"
                               " by the end of the window")))


def _exclusion_check(tr: Trajectory, records: list[CheckRecord]) -> None:
    """A run that entered Q > sqrt(n+1) cannot keep b growing forever:
    b' must turn negative in finite arclength."""
    entered = [e for e in tr.events
               if e.kind is EventKind.Q_REACHES_SQRT_NP1]
    if not entered:
        return
    s_enter = entered[0].s
    flips = [e for e in tr.events
             if e.kind is EventKind.B_PRIME_ZERO and e.s >= s_enter]
    if flips:
        records.append(CheckRecord(
            name="no sustained growth beyond shape threshold", passed=True,
            worst=float(flips[0].s - s_enter), bound=math.inf,
            s_at_worst=float(flips[0].s),
            note="worst is arclength from threshold to the b' sign flip"))
    elif tr.terminal is Terminal.REACHED_S_MAX:
        records.append(CheckRecord(
            name="no sustained growth beyond shape threshold", passed=False,
            worst=math.inf, bound=math.inf, first_violation_s=float(s_enter),
            note="entered the growth region and ran to s_max with b' > 0"))
    else:
        records.append(CheckRecord(
            name="no sustained growth beyond shape threshold", passed=True,
            worst=math.nan, bound=math.inf, flagged=True,
            note=f"run ended ({tr.terminal.value}) before b' flipped"))


def _integral_identity_check(tr: Trajectory, arr: dict,
                             records: list[CheckRecord]) -> None:
    """Reconstruct dQ from the integrating-factor form of its evolution
    equation and compare with the sampled values.

    The recursion carries only increments f(s_{i+1}) - f(t), so nothing
    overflows however negative f becomes.  The comparison scale at each
    sample is the magnitude of the two terms being combined (homogeneous
    part and accumulated integral), which is the honest notion of
    "relative" for a quantity that passes through zero.  Diagonal seeds
    are exempt: there both sides are identically zero and only roundoff
    would be compared.
    """
    cfg = tr.cfg
    if tr.params.branch is Branch.CONE and cfg.a0 == cfg.b0:
        records.append(CheckRecord(
            name="shape gradient integral identity", passed=True,
            worst=math.nan, bound=_INTEGRAL_IDENTITY_RTOL,
            note="diagonal seed exempt (both sides identically zero)"))
        return
    n = tr.params.n
    two_n = 2.0 * n
    s, b, f, q, dq = arr["s"], arr["b"], arr["f"], arr["Q"], arr["dQ"]
    m = len(s)
    if m < 3:
        return
    recon = dq[0]
    homog = abs(dq[0])
    integ = 0.0
    worst = 0.0
    worst_s = s[0]
    first_bad = None
    for i in range(m - 1):
        if s[i + 1] - s[i] <= 0.0:
            continue
        swing = (abs(f[i + 1] - f[i])
                 + (two_n + 1.0) * abs(math.log(b[i + 1] / b[i]))
                 + 3.0 * abs(math.log(q[i + 1] / q[i])))
        panels = min(_INTEGRAL_MAX_PANELS,
                     max(_INTEGRAL_MIN_PANELS,
                         math.ceil(swing / _INTEGRAL_LOG_STEP)))
        grid = np.linspace(s[i], s[i + 1], panels + 1)
        states = [tr.dense.state(x) for x in grid]
        bb = np.array([st.b for st in states])
        ff = np.array([st.f for st in states])
        qq = np.array([st.a / st.b for st in states])
        integrand = bb ** (two_n - 1.0) * np.exp(ff[-1] - ff) * (qq ** 3 - qq)
        piece = (two_n + 2.0) * np.trapezoid(integrand, grid)
        carry = (b[i] / b[i + 1]) ** (two_n + 1.0) * math.exp(f[i + 1] - f[i])
        recon = carry * recon + piece / b[i + 1] ** (two_n + 1.0)
        homog = carry * homog
        integ = carry * integ + abs(piece) / b[i + 1] ** (two_n + 1.0)
        scale = max(abs(dq[i + 1]), homog + integ)
        rel = abs(recon - dq[i + 1]) / scale if scale > 0.0 else 0.0
        if rel > worst:
            worst, worst_s = rel, s[i + 1]
        if rel > _INTEGRAL_IDENTITY_RTOL and first_bad is None:
            first_bad = float(s[i + 1])
    records.append(CheckRecord(
        name="shape gradient integral identity", passed=first_bad is None,
        worst=float(worst), bound=_INTEGRAL_IDENTITY_RTOL,
        s_at_worst=float(worst_s), first_violation_s=first_bad))


def run_checks(trajectory: Trajectory,
               with_integral_identity: bool = True) -> CheckReport:
    """Audit a trajectory against every applicable named check.

    The integral identity walks the dense output sample by sample and is
    the only non-vectorized check; callers auditing very long runs in
    bulk may switch it off.
    """
    arr = trajectory.arrays()
    records: list[CheckRecord] = []
    _drift_checks(trajectory, arr, records)
    _monotonicity_checks(trajectory, arr, records)
    _potential_checks(trajectory, arr, records)
    _shape_checks(trajectory, arr, records)
    _critical_point_check(trajectory, arr, records)
    _dichotomy_check(trajectory, arr, records)
    _exclusion_check(trajectory, records)
    if with_integral_identity:
        _integral_identity_check(trajectory, arr, records)
    return CheckReport(records=tuple(records))
