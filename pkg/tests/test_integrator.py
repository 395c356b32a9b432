"""Integration engine: exact solution tracking, events, dense output.

Event locations are pinned against the closed-form profile: the radial
coordinate where the shape ratio hits each trigger level is found by
root solving, then mapped to arclength by quadrature.  That route never
touches the step-by-step integrator, so agreement is meaningful.
"""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from steadysoliton import (
    EventKind,
    IntegrationControls,
    InvalidCase,
    ModelParams,
    NoSignChange,
    ShootConfig,
    Terminal,
    build_line_bundle_jet,
    integrate,
    locate_event,
    pagepope_arclength,
    pagepope_profiles,
    pagepope_solution,
)

# s-values from the closed form for n=1, a1=3, f0=0, solved to 1e-15:
# root of a^2 - q^2 b^2 in r, then arclength quadrature
S_Q_ONE = 0.40649696674459856
S_Q_SQRT2 = 0.66295570540499
S_B_PEAK = 0.9296839179355347  # b' = 0 happens exactly at r = 0


def arclength_at_ratio(q: float) -> float:
    """Independent recomputation of the frozen constants above."""
    sol = pagepope_solution(1, 3.0)
    if q is None:
        return pagepope_arclength(sol, 0.0)

    def gap(r: float) -> float:
        a2, b2, _ = pagepope_profiles(sol, r)
        return a2 - q * q * b2

    r = brentq(gap, sol.r_b + 1e-13, sol.L - 1e-13, xtol=1e-15)
    return pagepope_arclength(sol, r)


def test_frozen_oracle_values_still_reproduce():
    assert arclength_at_ratio(1.0) == pytest.approx(S_Q_ONE, abs=1e-12)
    assert arclength_at_ratio(math.sqrt(2.0)) == pytest.approx(
        S_Q_SQRT2, abs=1e-12)
    assert arclength_at_ratio(None) == pytest.approx(S_B_PEAK, abs=1e-12)


def test_euclidean_run_tracks_exact_solution(euclidean_case):
    _, trajectory, _ = euclidean_case
    arr = trajectory.arrays()
    assert trajectory.terminal is Terminal.REACHED_S_MAX
    assert trajectory.final_state.s == 60.0
    assert np.max(np.abs(arr["a"] - arr["s"])) <= 1e-10
    assert np.max(np.abs(arr["b"] - arr["s"])) <= 1e-10
    assert np.max(np.abs(arr["f"])) <= 1e-10


def test_event_locations_match_closed_form(crossing_run):
    found = {e.kind: e for e in crossing_run.events}
    assert found[EventKind.Q_CROSSES_ONE].s \
        == pytest.approx(S_Q_ONE, abs=1e-8)
    assert found[EventKind.Q_REACHES_SQRT_NP1].s \
        == pytest.approx(S_Q_SQRT2, abs=1e-8)
    peak = found[EventKind.B_PRIME_ZERO]
    assert peak.s == pytest.approx(S_B_PEAK, abs=1e-8)
    assert peak.state.a / peak.state.b == pytest.approx(2.0, abs=1e-6)


def test_event_states_sit_on_trigger_levels(crossing_run):
    for e in crossing_run.events:
        q = e.state.a / e.state.b
        if e.kind is EventKind.Q_CROSSES_ONE:
            assert q == pytest.approx(1.0, abs=1e-9)
        elif e.kind is EventKind.Q_REACHES_SQRT_NP1:
            assert q == pytest.approx(math.sqrt(2.0), abs=1e-9)
        elif e.kind is EventKind.B_PRIME_ZERO:
            assert abs(e.state.db) <= 1e-9


def test_stop_event_halts_immediately():
    params = ModelParams.line_bundle(1, 3, 2)
    cfg = ShootConfig.line_bundle(0.0)
    jet = build_line_bundle_jet(params, cfg)
    controls = IntegrationControls(
        stop_events=frozenset({EventKind.Q_CROSSES_ONE}))
    trajectory = integrate(jet, params, cfg, controls)
    assert trajectory.terminal is Terminal.EVENT_STOP
    assert trajectory.final_state.s == pytest.approx(S_Q_ONE, abs=1e-8)
    assert trajectory.events[-1].kind is EventKind.Q_CROSSES_ONE


def test_blowup_terminal(crossing_run):
    assert crossing_run.terminal is Terminal.BLOWUP
    assert crossing_run.final_state.s < 2.0
    final = crossing_run.final_state
    assert max(abs(final.a), abs(final.da), abs(final.b), abs(final.db),
               abs(final.df)) >= 1e7


def test_samples_strictly_increasing(collapsed_run):
    s = collapsed_run.arrays()["s"]
    assert np.all(np.diff(s) > 0.0)
    assert len(collapsed_run.samples) == len(collapsed_run.diag)
    ev = [e.s for e in collapsed_run.events]
    assert ev == sorted(ev)


def test_dense_output_consistency(collapsed_run):
    dense = collapsed_run.dense
    # matches stored samples at accepted steps
    for st in collapsed_run.samples[:: max(1, len(collapsed_run.samples)
                                           // 40)]:
        y = dense.state(st.s)
        assert y.a == pytest.approx(st.a, rel=1e-9, abs=1e-12)
        assert y.b == pytest.approx(st.b, rel=1e-9, abs=1e-12)
        assert y.f == pytest.approx(st.f, rel=1e-9, abs=1e-10)
    # continuous across segment joins
    for s_join in np.linspace(1.0, 59.0, 25):
        seg = dense.segment_at(s_join)
        left = dense.state(seg.s0 - 1e-13)
        right = dense.state(seg.s0 + 1e-13)
        assert left.a == pytest.approx(right.a, rel=1e-10)
        assert left.db == pytest.approx(right.db, rel=1e-8, abs=1e-10)


def test_dense_output_tracks_exact_solution(euclidean_case):
    _, trajectory, _ = euclidean_case
    for s in (0.5, 3.21, 17.77, 42.1234, 59.9):
        st = trajectory.dense.state(s)
        assert st.a == pytest.approx(s, abs=1e-9)
        assert st.b == pytest.approx(s, abs=1e-9)


def test_locate_event_finds_and_rejects(crossing_run, collapsed_run):
    # a segment that straddles the crossing yields the pinned root
    seg = crossing_run.dense.segment_at(S_Q_ONE)
    record = locate_event(seg, lambda st: st.a / st.b - 1.0,
                          kind=EventKind.Q_CROSSES_ONE)
    assert record.s == pytest.approx(S_Q_ONE, abs=1e-8)
    # late collapsed segments sit far below the crossing level
    seg = collapsed_run.dense.segment_at(50.0)
    with pytest.raises(NoSignChange):
        locate_event(seg, lambda st: st.a / st.b - 1.0,
                     kind=EventKind.Q_CROSSES_ONE)


class TestControlsValidation:
    def test_tolerance_window(self):
        with pytest.raises(InvalidCase):
            IntegrationControls(rel_tol=1e-15)
        with pytest.raises(InvalidCase):
            IntegrationControls(abs_tol=1e-2)

    def test_positive_range(self):
        with pytest.raises(InvalidCase):
            IntegrationControls(s_max=0.0)
        with pytest.raises(InvalidCase):
            IntegrationControls(blowup_threshold=0.5)
        with pytest.raises(InvalidCase):
            IntegrationControls(event_tol=0.0)

    def test_s_max_must_clear_handoff(self):
        params = ModelParams.line_bundle(1, 2, 2)
        cfg = ShootConfig.line_bundle(-10.0)
        jet = build_line_bundle_jet(params, cfg)
        with pytest.raises(InvalidCase):
            integrate(jet, params, cfg,
                      IntegrationControls(s_max=jet.handoff_radius / 2.0))

    def test_step_budget_exhaustion_raises(self):
        params = ModelParams.line_bundle(1, 2, 2)
        cfg = ShootConfig.line_bundle(-10.0)
        jet = build_line_bundle_jet(params, cfg)
        with pytest.raises(InvalidCase):
            integrate(jet, params, cfg, IntegrationControls(max_steps=20))
