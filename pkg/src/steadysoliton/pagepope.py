"""Closed-form scalar-flat profile family (Page-Pope gauge).

With vanishing potential the profile equations become Ricci-flat field
equations and close in a radial coordinate r once the fiber scale and
the coordinate gauge are locked together by a*p = L, where ds = p dr.
The base scale then satisfies b^2 = L^2 - r^2 on r in [rB, L), and the
fiber scale integrates in closed form by binomial expansion:

    a^2(r) = -(2n+2) L^2 r (r^2 - L^2)^(-n) * I(r),
    I(r)   = integral from rB to r of (t^2 - L^2)^n / t^2 dt.

The product r*I(r) is evaluated with the 1/t pole cancelled against the
leading factor of r, so a^2 is finite and accurate through r = 0, where
a^2 = (2n+2) L^2.  Arclength is recovered by quadrature of p = L/a with
a square-root substitution that absorbs the integrable endpoint at rB.

Everything here is an oracle: the stepper never sees these formulas.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import InvalidCase, MismatchedParams, OutOfDomain
from .integrator import Trajectory
from .model import Branch

__all__ = [
    "PagePopeSolution",
    "pagepope_solution",
    "pagepope_profiles",
    "pagepope_arclength",
    "ErrorReport",
    "compare_oracle",
]

_QUAD_TOL = 1e-13
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True, slots=True)
class PagePopeSolution:
    """Scalar-flat profile in the gauge a*p = L, domain r in [rB, L)."""

    n: int
    a1: float
    L: float
    r_b: float


def pagepope_solution(n: int, a1: float) -> PagePopeSolution:
    """Fix L and rB so that b(0) = 1 and the fiber slope at s=0 is a1."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidCase(f"closed form needs integer n >= 1, got {n!r}")
    if not a1 > n + 1:
        raise InvalidCase(f"closed form needs a1 > n+1, got a1={a1}, n={n}")
    L = a1 / math.sqrt(a1 * a1 - (n + 1.0) ** 2)
    r_b = -(n + 1.0) * L / a1
    return PagePopeSolution(n=n, a1=float(a1), L=L, r_b=r_b)


def _scaled_flux(sol: PagePopeSolution, r: float) -> float:
    """r * I(r) with the j = 0 pole of the antiderivative cancelled.

    The antiderivative of (t^2 - L^2)^n / t^2 expands to
    sum_j C(n,j) (-L^2)^(n-j) t^(2j-1)/(2j-1), whose j = 0 term is -1/t;
    multiplying the upper-limit contribution by r turns that term into
    the exact constant -1.
    """
    L2 = sol.L * sol.L
    upper = 0.0
    lower = 0.0
    for j in range(sol.n + 1):
        c = math.comb(sol.n, j) * (-L2) ** (sol.n - j)
        if j == 0:
            upper += -c
            lower += -c / sol.r_b
        else:
            upper += c * r ** (2 * j) / (2 * j - 1)
            lower += c * sol.r_b ** (2 * j - 1) / (2 * j - 1)
    return upper - r * lower


def _check_domain(sol: PagePopeSolution, r: float) -> None:
    if not (sol.r_b <= r < sol.L):
        raise OutOfDomain(
            f"r={r} outside [{sol.r_b}, {sol.L}) for this solution")


def pagepope_profiles(sol: PagePopeSolution,
                      r: float) -> tuple[float, float, float]:
    """(a^2, b^2, p^2) at radial coordinate r."""
    _check_domain(sol, r)
    b2 = (sol.L - r) * (sol.L + r)
    sign = -1.0 if sol.n % 2 else 1.0  # (r^2 - L^2)^n = (-1)^n b2^n
    a2 = -(2.0 * sol.n + 2.0) * sol.L ** 2 * _scaled_flux(sol, r) \
        * sign / b2 ** sol.n
    if a2 <= 0.0:
        a2 = 0.0  # only at r = rB, where the exact value is 0
        p2 = math.inf
    else:
        p2 = sol.L ** 2 / a2
    return a2, b2, p2


def _arc_integrand(sol: PagePopeSolution, u: float) -> float:
    a2, _, _ = pagepope_profiles(sol, sol.r_b + u * u)
    return 2.0 * u * sol.L / math.sqrt(a2) if u > 0.0 else \
        2.0 * sol.L / math.sqrt(_fiber_slope_sq(sol))


def _fiber_slope_sq(sol: PagePopeSolution) -> float:
    """d(a^2)/dr at rB: the limit of a^2/(r - rB)."""
    L2 = sol.L * sol.L
    dflux = 0.0  # d/dr of the antiderivative sum, at rB
    for j in range(1, sol.n + 1):
        c = math.comb(sol.n, j) * (-L2) ** (sol.n - j)
        dflux += c * 2 * j * sol.r_b ** (2 * j - 2) / (2 * j - 1)
    lower = 0.0
    for j in range(sol.n + 1):
        c = math.comb(sol.n, j) * (-L2) ** (sol.n - j)
        lower += (-c / sol.r_b if j == 0
                  else c * sol.r_b ** (2 * j - 1) / (2 * j - 1))
    sign = -1.0 if sol.n % 2 else 1.0
    b2 = (sol.L - sol.r_b) * (sol.L + sol.r_b)
    # product rule on r*I(r): at rB the integral term vanishes
    return -(2.0 * sol.n + 2.0) * L2 * (sol.r_b * dflux - lower) \
        * sign / b2 ** sol.n


def pagepope_arclength(sol: PagePopeSolution, r: float) -> float:
    """s(r) = integral of p from rB to r, via the substitution
    t = rB + u^2 that regularizes the a ~ sqrt(t - rB) endpoint."""
    _check_domain(sol, r)
    if r == sol.r_b:
        return 0.0
    u_hi = math.sqrt(r - sol.r_b)
    val, _ = quad(lambda u: _arc_integrand(sol, u), 0.0, u_hi,
                  epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200)
    return float(val)


class _ArclengthTable:
    """Cumulative s(u) on a uniform u-grid, Gauss-Legendre per cell.

    The integrand is smooth in u (even the endpoint), so ten nodes per
    cell reach rounding level; inversion brackets a cell by bisecting
    the cumulative sums and root-finds inside it.
    """

    def __init__(self, sol: PagePopeSolution, r_hi: float, cells: int = 800):
        self.sol = sol
        self.u = np.linspace(0.0, math.sqrt(r_hi - sol.r_b), cells + 1)
        s = [0.0]
        for i in range(cells):
            s.append(s[-1] + self._cell(self.u[i], self.u[i + 1]))
        self.s = s

    def _cell(self, u0: float, u1: float) -> float:
        half = 0.5 * (u1 - u0)
        mid = 0.5 * (u0 + u1)
        return half * sum(
            w * _arc_integrand(self.sol, mid + half * x)
            for x, w in zip(_GL_NODES, _GL_WEIGHTS))

    @property
    def s_max(self) -> float:
        return self.s[-1]

    def radius_at(self, s: float) -> float:
        """Invert s -> r inside the tabulated range."""
        if not (0.0 <= s <= self.s_max):
            raise OutOfDomain(f"s={s} outside tabulated [0, {self.s_max}]")
        i = min(bisect_right(self.s, s) - 1, len(self.s) - 2)
        u0, u1 = self.u[i], self.u[i + 1]
        def gap(u: float) -> float:
            return self.s[i] + self._cell(u0, u) - s
        g1 = gap(u1)
        if gap(u0) >= 0.0:
            u_star = u0
        elif g1 <= 0.0:
            u_star = u1
        else:
            u_star = brentq(gap, u0, u1, xtol=1e-14)
        return self.sol.r_b + u_star * u_star


@dataclass(frozen=True, slots=True)
class ErrorReport:
    """Worst relative profile deviations over the compared s-range."""

    max_rel_a: float
    max_rel_b: float
    samples_compared: int
    s_first: float
    s_last: float

    def to_json(self) -> dict:
        return {
            "maxRelErrA": self.max_rel_a,
            "maxRelErrB": self.max_rel_b,
            "samplesCompared": self.samples_compared,
            "sFirst": self.s_first,
            "sLast": self.s_last,
        }


def _radius_at_shape_ratio(sol: PagePopeSolution, q: float) -> float:
    """Solve a^2 = q^2 b^2; the ratio runs from 0 at rB up past any q."""
    def g(r: float) -> float:
        a2, b2, _ = pagepope_profiles(sol, r)
        return a2 - q * q * b2
    lo = sol.r_b + 1e-9 * (sol.L - sol.r_b)
    hi = sol.L * (1.0 - 1e-9) if sol.L > 0 else sol.L - 1e-9
    return float(brentq(g, lo, hi, xtol=1e-14))


def compare_oracle(trajectory: Trajectory, sol: PagePopeSolution,
                   q_cap: float = 20.0) -> ErrorReport:
    """Match trajectory samples against the closed form.

    Every sample whose s falls inside the oracle's tabulated range
    (bounded by the shape ratio reaching q_cap, where the radial
    coordinate approaches L and inversion degenerates) is inverted
    s -> r and compared; the report carries the worst relative errors.
    """
    params = trajectory.params
    if params.branch is not Branch.LINE_BUNDLE:
        raise MismatchedParams("oracle comparison needs a line-bundle run")
    if trajectory.cfg.f0 != 0.0:
        raise MismatchedParams(
            f"oracle holds only for f0 = 0, run has f0={trajectory.cfg.f0}")
    if sol.n != params.n or abs(sol.a1 - params.a1) > 1e-12 * sol.a1:
        raise MismatchedParams(
            f"oracle (n={sol.n}, a1={sol.a1}) vs run "
            f"(n={params.n}, a1={params.a1})")

    table = _ArclengthTable(sol, _radius_at_shape_ratio(sol, q_cap))
    max_a = 0.0
    max_b = 0.0
    count = 0
    s_first = s_last = math.nan
    for st in trajectory.samples:
        if not (0.0 <= st.s <= table.s_max):
            continue
        r = table.radius_at(st.s)
        a2, b2, _ = pagepope_profiles(sol, r)
        if a2 == 0.0:
            continue
        max_a = max(max_a, abs(st.a - math.sqrt(a2)) / math.sqrt(a2))
        max_b = max(max_b, abs(st.b - math.sqrt(b2)) / math.sqrt(b2))
        if count == 0:
            s_first = st.s
        s_last = st.s
        count += 1
    if count == 0:
        raise MismatchedParams("no trajectory samples inside oracle range")
    return ErrorReport(max_rel_a=max_a, max_rel_b=max_b,
                       samples_compared=count, s_first=s_first,
                       s_last=s_last)
