"""Pointwise properties of the reduced system and its diagnostics.

These run on synthetic states, not trajectories, so they exercise the
formulas themselves: the scaling symmetry of the equations, closure of
the diagonal subsystem, the curvature trace identity, and the exact
flat solution.
"""

import math

import pytest
from hypothesis import given, settings, strategies as st

from steadysoliton import (
    Branch,
    DegenerateState,
    InvalidCase,
    ModelParams,
    ShootConfig,
    SolitonState,
    diagnostics,
    eval_rhs,
    first_integral_constant,
    q_ratio,
)

HALF_INTEGERS = (0.5, 1.0, 1.5, 2.0, 3.0, 5.0)

scales = st.floats(min_value=0.1, max_value=5.0,
                   allow_nan=False, allow_infinity=False)
slopes = st.floats(min_value=-3.0, max_value=3.0,
                   allow_nan=False, allow_infinity=False)
states = st.builds(
    SolitonState,
    s=st.floats(min_value=0.01, max_value=50.0),
    a=scales, da=slopes, b=scales, db=slopes,
    f=st.floats(min_value=-10.0, max_value=1.0), df=slopes)


@settings(max_examples=200, deadline=None)
@given(state=states, n=st.sampled_from(HALF_INTEGERS),
       lam=st.floats(min_value=0.5, max_value=2.0))
def test_rhs_scaling_covariance(state, n, lam):
    """(a, b) -> (lam a, lam b), df -> df/lam maps the rhs predictably.

    The system inherits the scaling symmetry s -> s/lam of the soliton
    equations: second derivatives of the scales pick up 1/lam, the
    potential's second derivative picks up 1/lam^2.
    """
    params = ModelParams.cone(n)
    base = eval_rhs(state, params)
    scaled_state = SolitonState(s=state.s, a=lam * state.a, da=state.da,
                                b=lam * state.b, db=state.db,
                                f=state.f, df=state.df / lam)
    scaled = eval_rhs(scaled_state, params)
    tol = 1e-12 * (1.0 + abs(base.dda) + abs(base.ddb) + abs(base.ddf))
    assert scaled.dda == pytest.approx(base.dda / lam, abs=tol)
    assert scaled.ddb == pytest.approx(base.ddb / lam, abs=tol)
    assert scaled.ddf == pytest.approx(base.ddf / (lam * lam), abs=tol)


@settings(max_examples=200, deadline=None)
@given(a=scales, da=slopes, df=slopes, n=st.sampled_from(HALF_INTEGERS))
def test_rhs_diagonal_closure(a, da, df, n):
    """a = b with a' = b' keeps a'' = b'': the diagonal is invariant."""
    params = ModelParams.cone(n)
    state = SolitonState(s=1.0, a=a, da=da, b=a, db=da, f=0.0, df=df)
    out = eval_rhs(state, params)
    assert out.dda == pytest.approx(out.ddb, abs=1e-13 * (1 + abs(out.dda)))


@settings(max_examples=200, deadline=None)
@given(state=states, n=st.sampled_from(HALF_INTEGERS),
       f0=st.floats(min_value=-20.0, max_value=0.0))
def test_scalar_curvature_traces_ricci(state, n, f0):
    """R from first-order data equals the frame trace of the Ricci entries.

    The two expressions are different formulas; they agree only because
    the second derivatives really are the soliton reduction.
    """
    params = ModelParams.cone(n)
    cfg = ShootConfig.cone(f0 / (2.0 * n + 1.0), f0 / (2.0 * n + 1.0), n)
    d = diagnostics(state, params, cfg)
    trace = d.ricci_normal + d.ricci_circle + 2.0 * n * d.ricci_sphere
    scale = 1.0 + abs(d.R) + abs(d.ricci_normal) + abs(d.ricci_circle) \
        + 2.0 * n * abs(d.ricci_sphere)
    assert d.R == pytest.approx(trace, abs=1e-12 * scale)


@pytest.mark.parametrize("n", HALF_INTEGERS)
@pytest.mark.parametrize("s", (0.3, 1.0, 7.5))
def test_flat_solution_is_exact(n, s):
    """a = b = s, f = 0 zeroes every diagnostic identically."""
    params = ModelParams.cone(n)
    cfg = ShootConfig.cone(0.0, 0.0, n)
    state = SolitonState(s=s, a=s, da=1.0, b=s, db=1.0, f=0.0, df=0.0)
    # residues are pure roundoff on terms of size (n+1)/s and (n+1)^2/s^2
    lin = 1e-13 * (n + 1.0) / s
    quad = 1e-13 * ((n + 1.0) / s) ** 2
    out = eval_rhs(state, params)
    assert abs(out.dda) <= lin
    assert abs(out.ddb) <= lin
    assert abs(out.ddf) <= quad
    d = diagnostics(state, params, cfg)
    assert abs(d.R) <= quad
    assert abs(d.H) <= quad
    assert d.Q == 1.0
    assert d.dQ == 0.0


@pytest.mark.parametrize("n,expected_factor", [(1.0, 2.0), (2.0, 2.0)])
def test_first_integral_constant_line_bundle(n, expected_factor):
    params = ModelParams.line_bundle(int(n), 2, 1)
    cfg = ShootConfig.line_bundle(-3.0)
    assert first_integral_constant(params, cfg) == expected_factor * -3.0


@pytest.mark.parametrize("n", (0.5, 1.0, 2.0))
def test_first_integral_constant_cone(n):
    cfg = ShootConfig.cone(-1.0, -1.0, n)
    params = ModelParams.cone(n)
    assert first_integral_constant(params, cfg) \
        == (2.0 * n + 2.0) * cfg.f0


def test_q_ratio_matches_quotient_rule():
    state = SolitonState(s=2.0, a=1.2, da=0.7, b=1.9, db=-0.3, f=0.0,
                         df=-0.5)
    q, dq = q_ratio(state)
    assert q == pytest.approx(1.2 / 1.9, rel=1e-15)
    assert dq == pytest.approx((0.7 * 1.9 - 1.2 * -0.3) / 1.9 ** 2,
                               rel=1e-14)


class TestValidation:
    def test_n_must_be_half_integer(self):
        with pytest.raises(InvalidCase):
            ModelParams.cone(0.3)
        with pytest.raises(InvalidCase):
            ModelParams.cone(0.0)
        with pytest.raises(InvalidCase):
            ModelParams.cone(-1.0)

    def test_line_bundle_needs_integers(self):
        with pytest.raises(InvalidCase):
            ModelParams(n=1.5, branch=Branch.LINE_BUNDLE, k=2, p=1)
        with pytest.raises(InvalidCase):
            ModelParams(n=1.0, branch=Branch.LINE_BUNDLE, k=None, p=1)
        with pytest.raises(InvalidCase):
            ModelParams.line_bundle(1, 0, 1)
        with pytest.raises(InvalidCase):
            ModelParams.line_bundle(1, 2, -1)

    def test_boundary_slope(self):
        assert ModelParams.line_bundle(1, 3, 2).a1 == 3.0
        assert ModelParams.line_bundle(2, 1, 1).a1 == 3.0
        assert ModelParams.cone(1.0).a1 == 1.0

    def test_f0_sign(self):
        with pytest.raises(InvalidCase):
            ShootConfig.line_bundle(1.0)
        with pytest.raises(InvalidCase):
            ShootConfig.line_bundle(math.nan)
        assert ShootConfig.line_bundle(0.0).f0 == 0.0

    def test_cone_seed_ordering(self):
        with pytest.raises(InvalidCase):
            ShootConfig.cone(1.0, -1.0, 1.0)
        with pytest.raises(InvalidCase):
            ShootConfig.cone(1.0, 1.0, 1.0)  # f0 = 3 > 0
        cfg = ShootConfig.cone(-2.0, 1.0, 1.0)
        assert cfg.f0 == 0.0

    def test_degenerate_state_rejected(self):
        params = ModelParams.cone(1.0)
        bad = SolitonState(s=1.0, a=0.0, da=1.0, b=1.0, db=1.0, f=0.0,
                           df=0.0)
        with pytest.raises(DegenerateState):
            eval_rhs(bad, params)
        with pytest.raises(DegenerateState):
            diagnostics(bad, params, ShootConfig.cone(0.0, 0.0, 1.0))
        with pytest.raises(DegenerateState):
            q_ratio(SolitonState(s=1.0, a=1.0, da=0.0, b=-1.0, db=0.0,
                                 f=0.0, df=0.0))
