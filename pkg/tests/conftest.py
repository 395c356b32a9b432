"""Shared fixtures: the handful of reference runs most tests reuse.

Integrations are deterministic, so session scope is safe and keeps the
suite fast; nothing here mutates a trajectory after it is built.
"""

import pytest

from steadysoliton import (
    IntegrationControls,
    ModelParams,
    ShootConfig,
    Trajectory,
    build_line_bundle_jet,
    integrate,
    run_cone_case,
)


def line_bundle_run(n: int, k: int, p: int, f0: float,
                    s_max: float = 60.0, **kw) -> Trajectory:
    params = ModelParams.line_bundle(n, k, p)
    cfg = ShootConfig.line_bundle(f0)
    jet = build_line_bundle_jet(params, cfg)
    return integrate(jet, params, cfg,
                     IntegrationControls(s_max=s_max, **kw))


@pytest.fixture(scope="session")
def collapsed_run() -> Trajectory:
    """n=1, k=2, f0=-10: the reference collapsed trajectory."""
    return line_bundle_run(1, 2, 2, -10.0)


@pytest.fixture(scope="session")
def crossing_run() -> Trajectory:
    """n=1, a1=3, f0=0: crossing regime, blows up near s=1.3."""
    return line_bundle_run(1, 3, 2, 0.0)


@pytest.fixture(scope="session")
def crossing_run_negative_f0() -> Trajectory:
    """n=1, a1=3, f0=-5: crossing with a decaying potential."""
    return line_bundle_run(1, 3, 2, -5.0)


@pytest.fixture(scope="session")
def euclidean_case():
    """Zero seed: the exact flat solution a = b = s."""
    return run_cone_case(1.0, 0.0, 0.0)


@pytest.fixture(scope="session")
def taubnut_case():
    """n=1, a0=-2, b0=1: flat seed with a genuinely off-diagonal shape."""
    return run_cone_case(1.0, -2.0, 1.0)


@pytest.fixture(scope="session")
def taubnutlike_case():
    return run_cone_case(1.0, -3.0, 1.0)


@pytest.fixture(scope="session")
def bryant4_case():
    """Diagonal seed a0 = b0 = -1 in dimension 4 (n = 1)."""
    return run_cone_case(1.0, -1.0, -1.0)
