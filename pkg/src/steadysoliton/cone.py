"""Smooth-cone branch: runs seeded at a(0) = b(0) = 0.

Four qualitative cases, split by two exact sign conditions on the
second-order seed (a0, b0): whether the potential curvature
f0 = a0 + 2n b0 vanishes and whether the seed is diagonal (a0 = b0).

    f0 = 0, a0 = b0   flat space, a = b = s
    f0 = 0, a0 < b0   Ricci-flat with bounded fiber (b ~ s, a -> const)
    f0 < 0, a0 = b0   rotationally symmetric soliton, a = b throughout
    f0 < 0, a0 < b0   collapsing soliton, Q -> 0

The detection is by exact comparison, not tolerance: the caller chose
the seed, so equality of a0 and b0 is a statement about inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .asymptotics import (TailFit, fit_sqrt_growth, predicted_fprime_limit,
                          predicted_slopes)
from .errors import BadDimension
from .integrator import IntegrationControls, Trajectory, integrate
from .model import ModelParams, ShootConfig
from .series import build_cone_jet

__all__ = [
    "ConeCaseLabel",
    "ConeCase",
    "detect_cone_case",
    "run_cone_case",
    "bryant_for_dimension",
    "CaseCheck",
    "conformance",
]


class ConeCaseLabel(Enum):
    EUCLIDEAN = "Euclidean"
    TAUB_NUT = "TaubNut"
    BRYANT = "Bryant"
    TAUB_NUT_LIKE = "TaubNutLike"


@dataclass(frozen=True, slots=True)
class ConeCase:
    label: ConeCaseLabel
    n: float
    a0: float
    b0: float

    @property
    def f0(self) -> float:
        return self.a0 + 2.0 * self.n * self.b0

    def to_json(self) -> dict:
        return {"case": self.label.value, "n": self.n,
                "a0": self.a0, "b0": self.b0, "f0": self.f0}


def detect_cone_case(n: float, a0: float, b0: float) -> ConeCase:
    """Classify the seed by the exact signs of f0 and b0 - a0.

    Raises:
        InvalidCase: via ShootConfig validation, if a0 > b0 or f0 > 0.
    """
    # Reuse the seed validation (a0 <= b0 < 0 is impossible here since
    # b0 > 0 is required for a nondegenerate cone; ShootConfig checks).
    ShootConfig.cone(a0, b0, n)
    f0 = a0 + 2.0 * n * b0
    if f0 == 0.0:
        label = (ConeCaseLabel.EUCLIDEAN if a0 == b0
                 else ConeCaseLabel.TAUB_NUT)
    else:
        label = (ConeCaseLabel.BRYANT if a0 == b0
                 else ConeCaseLabel.TAUB_NUT_LIKE)
    return ConeCase(label=label, n=n, a0=a0, b0=b0)


def run_cone_case(
    n: float,
    a0: float,
    b0: float,
    controls: IntegrationControls | None = None,
    order: int = 10,
) -> tuple[ConeCase, Trajectory, TailFit]:
    """Integrate a cone seed and fit its tail."""
    case = detect_cone_case(n, a0, b0)
    params = ModelParams.cone(n)
    cfg = ShootConfig.cone(a0, b0, n)
    jet = build_cone_jet(params, cfg, order=order)
    trajectory = integrate(jet, params, cfg, controls)
    fit = fit_sqrt_growth(trajectory)
    return case, trajectory, fit


def bryant_for_dimension(
    d: int,
    a0: float = -1.0,
    controls: IntegrationControls | None = None,
) -> tuple[Trajectory, TailFit]:
    """Rotationally symmetric soliton in dimension d = 2n + 2.

    The diagonal seed a0 = b0 < 0 gives f0 = (2n + 1) a0.

    Raises:
        BadDimension: d is not an integer >= 3.
    """
    if isinstance(d, bool) or not isinstance(d, int) or d < 3:
        raise BadDimension(f"need an integer dimension >= 3, got {d!r}")
    if a0 >= 0.0:
        raise BadDimension(f"diagonal seed must be negative, got a0={a0}")
    n = (d - 2) / 2.0
    _, trajectory, fit = run_cone_case(n, a0, a0, controls)
    return trajectory, fit


@dataclass(frozen=True, slots=True)
class CaseCheck:
    name: str
    passed: bool
    value: float
    bound: float

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "value": self.value, "bound": self.bound}


def _rel_slope_err(fit_slope: float, predicted: float) -> float:
    return abs(fit_slope - predicted) / abs(predicted)


def conformance(case: ConeCase, trajectory: Trajectory,
                fit: TailFit) -> list[CaseCheck]:
    """Quantitative checks of the predicted behavior for each case.

    Tail limits converge slowly (corrections of order 1/s), so the
    bounds here are sized for the default s_max = 60 run; they tighten
    if the caller integrates further.
    """
    params = ModelParams.cone(case.n)
    cfg = ShootConfig.cone(case.a0, case.b0, case.n)
    arr = trajectory.arrays()
    last = trajectory.final_state
    checks: list[CaseCheck] = []

    def add(name: str, value: float, bound: float) -> None:
        checks.append(CaseCheck(name=name, passed=bool(value <= bound),
                                value=float(value), bound=bound))

    if case.label is ConeCaseLabel.EUCLIDEAN:
        add("max |a - s|", np.max(np.abs(arr["a"] - arr["s"])), 1e-10)
        add("max |b - s|", np.max(np.abs(arr["b"] - arr["s"])), 1e-10)
        add("max |f|", np.max(np.abs(arr["f"])), 1e-10)
    elif case.label is ConeCaseLabel.TAUB_NUT:
        add("max |f|", np.max(np.abs(arr["f"])), 1e-5)
        add("|da| at end", abs(last.da), 1e-3)
        if case.n > 0.5:
            # db' ~ ((2n+2) - (2n-1) db^2)/b forces this limit slope
            db_limit = math.sqrt((2.0 * case.n + 2.0) / (2.0 * case.n - 1.0))
            add(f"|db - {db_limit:g}| at end", abs(last.db - db_limit), 0.05)
    elif case.label is ConeCaseLabel.BRYANT:
        diag = np.max(np.abs(arr["a"] - arr["b"]) / arr["a"])
        add("max |a - b| / a", diag, 1e-9)
        slope_a, slope_b = predicted_slopes(params, cfg, q_limit=1.0)
        add("rel err of d(b^2)/ds vs closed form",
            _rel_slope_err(fit.slope_b, slope_b), 0.05)
        add("rel err of d(a^2)/ds vs closed form",
            _rel_slope_err(fit.slope_a, slope_a), 0.05)
    else:  # TAUB_NUT_LIKE
        add("Q at end", last.a / last.b, 0.1)
        _, slope_b = predicted_slopes(params, cfg, q_limit=0.0)
        add("rel err of d(b^2)/ds vs closed form",
            _rel_slope_err(fit.slope_b, slope_b), 0.05)
        add("|df - limit| at end",
            abs(last.df - predicted_fprime_limit(params, cfg)), 0.05)
    return checks
