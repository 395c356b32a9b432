"""Closed-form profile: self-consistency and comparison plumbing.

The stencil test is the load-bearing one: it differentiates the closed
form numerically along arclength and plugs the results into the profile
equations with a flat potential.  Nothing in that loop shares code with
the integrator, so a pass certifies the oracle the solver is later
judged against.
"""

import math

import pytest

from steadysoliton import (
    InvalidCase,
    MismatchedParams,
    ModelParams,
    OutOfDomain,
    ShootConfig,
    build_cone_jet,
    compare_oracle,
    integrate,
    pagepope_arclength,
    pagepope_profiles,
    pagepope_solution,
)

STENCIL_H = 2e-3


def _stencil(fn, r0: float, h: float) -> tuple[float, float, float]:
    """(value, d/dr, d2/dr2): five-point differences, Richardson in h.

    The h and 2h operators combine to cancel the h^4 truncation term;
    what is left is roundoff, a few parts in 1e10 of the value here.
    """
    def ops(step: float) -> tuple[float, float]:
        v = [fn(r0 + j * step) for j in (-2, -1, 0, 1, 2)]
        d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * step)
        d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) \
            / (12 * step * step)
        return d1, d2

    d1h, d2h = ops(h)
    d1hh, d2hh = ops(2 * h)
    return fn(r0), (16 * d1h - d1hh) / 15.0, (16 * d2h - d2hh) / 15.0


@pytest.mark.parametrize("n,a1", [(1, 3.0), (2, 4.5), (3, 6.0)])
def test_closed_form_satisfies_profile_equations(n, a1):
    """Stencil residuals of both equations stay below 1e-8.

    Derivatives are taken in the radial coordinate on the squared
    fiber profile (the sphere profile is an exact quadratic there) and
    converted with the gauge relation ds = (L/a) dr.  Measured worst
    over these three cases is 1.7e-9, limited by stencil roundoff.
    """
    sol = pagepope_solution(n, a1)
    grid = [sol.r_b + 0.05 + i * (0.7 * sol.L - sol.r_b - 0.05) / 40.0
            for i in range(41)]
    L2 = sol.L * sol.L
    worst = 0.0
    for r0 in grid:
        x0, x_r, x_rr = _stencil(
            lambda r: pagepope_profiles(sol, r)[0], r0, STENCIL_H)
        y_r = -2.0 * r0  # b^2 = L^2 - r^2 exactly
        a0 = math.sqrt(x0)
        b0 = math.sqrt(L2 - r0 * r0)
        da = x_r / (2.0 * sol.L)
        db = a0 * y_r / (2.0 * sol.L * b0)
        dda = a0 * x_rr / (2.0 * L2)
        ddb = (a0 / (2.0 * L2)) * (x_r * y_r / (2.0 * a0 * b0)
                                   - 2.0 * a0 / b0
                                   - a0 * y_r * y_r / (2.0 * b0 ** 3))
        two_n = 2.0 * n
        res_a = dda - two_n * (a0 ** 3 / b0 ** 4 - da * db / b0)
        res_b = ddb - ((two_n + 2.0) / b0 - 2.0 * a0 ** 2 / b0 ** 3
                       - da * db / a0 - (two_n - 1.0) * db ** 2 / b0)
        scale = 1.0 + abs(dda) + abs(ddb)
        worst = max(worst, abs(res_a) / scale, abs(res_b) / scale)
    assert worst <= 1e-8


@pytest.mark.parametrize("n,a1", [(1, 3.0), (2, 4.5), (3, 6.0)])
def test_gauge_normalizations(n, a1):
    sol = pagepope_solution(n, a1)
    # b(0) = 1 pins L^2 - rB^2 = 1
    assert sol.L ** 2 - sol.r_b ** 2 == pytest.approx(1.0, abs=1e-13)
    # at the b-peak (r = 0) the shape ratio is sqrt(2n+2)
    a2, b2, p2 = pagepope_profiles(sol, 0.0)
    assert b2 == pytest.approx(sol.L ** 2, rel=1e-14)
    assert a2 == pytest.approx((2.0 * n + 2.0) * sol.L ** 2, rel=1e-12)
    assert p2 == pytest.approx(sol.L ** 2 / a2, rel=1e-12)


def test_arclength_starts_at_zero_and_grows():
    sol = pagepope_solution(1, 3.0)
    assert pagepope_arclength(sol, sol.r_b) == 0.0
    rs = [sol.r_b + t * (sol.L - sol.r_b) * 0.95 for t in
          (0.1, 0.3, 0.5, 0.7, 0.9)]
    ss = [pagepope_arclength(sol, r) for r in rs]
    assert all(s1 > s0 for s0, s1 in zip(ss, ss[1:]))


def test_solution_validation():
    with pytest.raises(InvalidCase):
        pagepope_solution(0, 3.0)
    with pytest.raises(InvalidCase):
        pagepope_solution(1, 2.0)  # needs a1 > n+1
    with pytest.raises(InvalidCase):
        pagepope_solution(1.0, 3.0)  # type: ignore[arg-type]


def test_domain_limits():
    sol = pagepope_solution(1, 3.0)
    with pytest.raises(OutOfDomain):
        pagepope_profiles(sol, sol.r_b - 1e-6)
    with pytest.raises(OutOfDomain):
        pagepope_profiles(sol, sol.L)
    # at the boundary orbit itself the fiber closes up
    a2, b2, p2 = pagepope_profiles(sol, sol.r_b)
    assert 0.0 <= a2 <= 1e-12
    assert b2 == pytest.approx(1.0, abs=1e-13)
    assert p2 > 1e10


def test_oracle_comparison_bounds(crossing_run):
    report = compare_oracle(crossing_run, pagepope_solution(1, 3.0),
                            q_cap=1.5)
    assert report.max_rel_a <= 1e-8
    assert report.max_rel_b <= 1e-10
    assert report.samples_compared > 50
    assert report.s_first < 0.1 and report.s_last > 0.5


def test_oracle_rejects_mismatches(crossing_run,
                                   crossing_run_negative_f0):
    with pytest.raises(MismatchedParams):
        compare_oracle(crossing_run_negative_f0, pagepope_solution(1, 3.0))
    with pytest.raises(MismatchedParams):
        compare_oracle(crossing_run, pagepope_solution(2, 4.5))
    params = ModelParams.cone(1.0)
    cfg = ShootConfig.cone(-1.0, -1.0, 1.0)
    cone_run = integrate(build_cone_jet(params, cfg), params, cfg)
    with pytest.raises(MismatchedParams):
        compare_oracle(cone_run, pagepope_solution(1, 3.0))
