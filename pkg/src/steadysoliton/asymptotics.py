"""Tail-behavior extraction: square-root growth, potential slope, decay.

Complete trajectories grow like a^2, b^2 ~ slope * s with slopes set by
the limiting shape ratio and the potential slope, df -> -sqrt(-2 f0).
Everything here reads the raw accepted-step samples; nothing is
resampled, so the fits see exactly what the stepper produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import ClassLabel, classify
from .errors import NotCollapsed, WindowTooShort
from .integrator import Trajectory
from .model import ModelParams, ShootConfig, first_integral_constant

__all__ = [
    "TailFit",
    "default_tail_window",
    "fit_sqrt_growth",
    "limit_fprime",
    "DecayReport",
    "verify_decay",
    "predicted_fprime_limit",
    "predicted_slopes",
]

_MIN_WINDOW_SAMPLES = 50


@dataclass(frozen=True, slots=True)
class TailFit:
    """Least-squares tail description over [s_lo, s_hi]."""

    s_lo: float
    s_hi: float
    slope_a: float  # fitted d(a^2)/ds
    slope_b: float  # fitted d(b^2)/ds
    f_prime_limit: float
    q_limit: float
    decay_exponent: float  # log-log slope of Q(s); meaningful when Q -> 0
    samples: int

    def to_json(self) -> dict:
        return {
            "window": [self.s_lo, self.s_hi],
            "slopeA": self.slope_a,
            "slopeB": self.slope_b,
            "fPrimeLimit": self.f_prime_limit,
            "QLimit": self.q_limit,
            "decayExponent": self.decay_exponent,
            "samples": self.samples,
        }


def default_tail_window(trajectory: Trajectory) -> tuple[float, float]:
    """Last third of the trajectory, starting no earlier than s = 20."""
    s_first = trajectory.samples[0].s
    s_last = trajectory.samples[-1].s
    lo = max(s_last - (s_last - s_first) / 3.0, 20.0)
    if lo >= s_last:
        raise WindowTooShort(
            f"trajectory ends at s={s_last}, before the tail regime")
    return lo, s_last


def _window_arrays(trajectory: Trajectory,
                   window: tuple[float, float] | None) -> dict:
    if window is None:
        window = default_tail_window(trajectory)
    s_lo, s_hi = window
    arr = trajectory.arrays()
    s = arr["s"]
    if s_lo < s[0] - 1e-12 or s_hi > s[-1] + 1e-12 or s_lo >= s_hi:
        raise WindowTooShort(
            f"window [{s_lo}, {s_hi}] not inside trajectory "
            f"range [{s[0]}, {s[-1]}]")
    mask = (s >= s_lo) & (s <= s_hi)
    if int(mask.sum()) < _MIN_WINDOW_SAMPLES:
        raise WindowTooShort(
            f"window [{s_lo}, {s_hi}] holds {int(mask.sum())} samples, "
            f"need {_MIN_WINDOW_SAMPLES}")
    return {k: v[mask] for k, v in arr.items()}


def fit_sqrt_growth(trajectory: Trajectory,
                    window: tuple[float, float] | None = None) -> TailFit:
    """Linear fits of a^2 and b^2 against s over the window.

    The growth laws are literally linear in the squared profiles, so the
    fit model is (s, y^2), not log-log.
    """
    w = _window_arrays(trajectory, window)
    s = w["s"]
    slope_a = float(np.polyfit(s, w["a"] ** 2, 1)[0])
    slope_b = float(np.polyfit(s, w["b"] ** 2, 1)[0])
    decay = float(np.polyfit(np.log(s), np.log(w["Q"]), 1)[0])
    return TailFit(s_lo=float(s[0]), s_hi=float(s[-1]),
                   slope_a=slope_a, slope_b=slope_b,
                   f_prime_limit=float(np.mean(w["df"])),
                   q_limit=float(np.mean(w["Q"])),
                   decay_exponent=decay, samples=len(s))


def limit_fprime(trajectory: Trajectory,
                 window: tuple[float, float] | None = None) -> float:
    """Average of df over the tail window."""
    w = _window_arrays(trajectory, window)
    return float(np.mean(w["df"]))


def predicted_fprime_limit(params: ModelParams, cfg: ShootConfig) -> float:
    """Tail limit of df: the balance -df^2 = first integral constant
    once the trace term a'/a + 2n b'/b has decayed."""
    return -math.sqrt(-first_integral_constant(params, cfg))


def predicted_slopes(params: ModelParams, cfg: ShootConfig,
                     q_limit: float) -> tuple[float, float]:
    """Closed-form tail slopes (d(a^2)/ds, d(b^2)/ds) for a run with
    limiting shape ratio q_limit (0 or 1)."""
    n = params.n
    f_prime = predicted_fprime_limit(params, cfg)
    slope_b = 4.0 * (n + 1.0 - q_limit * q_limit) / (-f_prime)
    slope_a = 4.0 * n * q_limit ** 4 / (-f_prime)
    return slope_a, slope_b


@dataclass(frozen=True, slots=True)
class DecayReport:
    """Outcome of the collapsed-run decay-rate check."""

    passed: bool
    decay_exponent: float
    exponent_stderr: float
    sup_scaled: float  # sup of Q * s^(1/2 - eps) over the window
    scaled_monotone: bool  # Q * s^(1/2 - eps) non-increasing
    s_lo: float
    s_hi: float

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "decayExponent": self.decay_exponent,
            "exponentStderr": self.exponent_stderr,
            "supScaled": self.sup_scaled,
            "scaledMonotone": self.scaled_monotone,
            "window": [self.s_lo, self.s_hi],
        }


def verify_decay(trajectory: Trajectory, epsilon: float = 0.1,
                 window: tuple[float, float] | None = None) -> DecayReport:
    """Check Q decays at least like s^(-1/2 + epsilon) over the tail.

    Pass criterion: the log-log slope of Q(s) stays at or below
    -(1/2 - epsilon) within two standard errors of the fit, so the
    scaled quantity Q * s^(1/2 - epsilon) shows no growth trend.
    """
    cls = classify(trajectory)
    if cls.label is not ClassLabel.COLLAPSED:
        raise NotCollapsed(
            f"decay check needs a Collapsed run, got {cls.label.value}")
    w = _window_arrays(trajectory, window)
    log_s = np.log(w["s"])
    log_q = np.log(w["Q"])
    coeffs, cov = np.polyfit(log_s, log_q, 1, cov=True)
    slope = float(coeffs[0])
    stderr = float(math.sqrt(max(cov[0][0], 0.0)))
    scaled = w["Q"] * w["s"] ** (0.5 - epsilon)
    monotone = bool(np.all(np.diff(scaled) <= 1e-12 * scaled[:-1] + 1e-15))
    passed = slope + (0.5 - epsilon) <= 2.0 * stderr
    return DecayReport(passed=passed, decay_exponent=slope,
                       exponent_stderr=stderr,
                       sup_scaled=float(np.max(scaled)),
                       scaled_monotone=monotone,
                       s_lo=float(w["s"][0]), s_hi=float(w["s"][-1]))
