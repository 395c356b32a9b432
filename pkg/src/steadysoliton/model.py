"""State types and pointwise evaluations for the warped-product flow.

The metric ansatz carries two warping functions: ``a`` scales the circle
direction and ``b`` scales a base sphere of dimension ``2n``, both as
functions of arclength ``s`` from the degenerate orbit, together with a
potential ``f``.  Everything in this module is a pure function of a
single state; no integration or series logic lives here.

The second-order system in first-order form reads, with ' = d/ds,

    a'' = 2n (a^3/b^4 - a' b'/b) + a' f'
    b'' = (2n+2)/b - 2 a^2/b^3 - a' b'/a - (2n-1) b'^2/b + b' f'
    f'' = a''/a + 2n b''/b

and conserves  f'' + (a'/a + 2n b'/b) f' - f'^2, whose constant value
is branch dependent (see first_integral_constant); the residual against
that constant is reported as ``H`` in the diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DegenerateState, InvalidCase

__all__ = [
    "Branch",
    "ModelParams",
    "ShootConfig",
    "SolitonState",
    "DerivativeVector",
    "Diagnostics",
    "first_integral_constant",
    "eval_rhs",
    "q_ratio",
    "diagnostics",
]


class Branch(Enum):
    """Which degenerate orbit the trajectory leaves at s = 0."""

    LINE_BUNDLE = "line_bundle"  # a(0) = 0, b(0) = 1
    CONE = "cone"                # a(0) = b(0) = 0


def _validate_half_integer(n: float) -> None:
    if not (n > 0 and math.isfinite(n)):
        raise InvalidCase(f"dimension parameter n must be positive, got {n}")
    if abs(2.0 * n - round(2.0 * n)) != 0.0:
        raise InvalidCase(f"n must be a multiple of 1/2, got {n}")


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Static problem parameters.

    n is half the base-sphere dimension (a positive multiple of 1/2; the
    closed-form oracle additionally needs it integral).  For the line
    bundle branch, k and p are the positive twisting integers fixing the
    boundary slope a1 = (n+1) k / p; for the cone branch a1 = 1.
    """

    n: float
    branch: Branch
    k: int | None = None
    p: int | None = None

    def __post_init__(self) -> None:
        _validate_half_integer(self.n)
        if self.branch is Branch.LINE_BUNDLE:
            if not (isinstance(self.k, int) and isinstance(self.p, int)):
                raise InvalidCase("line bundle branch needs integer k and p")
            if self.k <= 0 or self.p <= 0:
                raise InvalidCase("twisting integers k and p must be positive")
            if self.n != round(self.n):
                raise InvalidCase("line bundle branch needs integer n")

    @classmethod
    def line_bundle(cls, n: int, k: int, p: int) -> "ModelParams":
        return cls(n=float(n), branch=Branch.LINE_BUNDLE, k=k, p=p)

    @classmethod
    def cone(cls, n: float) -> "ModelParams":
        return cls(n=float(n), branch=Branch.CONE)

    @property
    def a1(self) -> float:
        """Boundary slope a'(0)."""
        if self.branch is Branch.LINE_BUNDLE:
            return (self.n + 1.0) * self.k / self.p
        return 1.0


@dataclass(frozen=True, slots=True)
class ShootConfig:
    """Free boundary data at s = 0.

    f0 is f''(0) <= 0, the single shooting parameter on the line bundle
    branch.  On the cone branch the free data are the third derivatives
    a0 = a'''(0) and b0 = b'''(0) with a0 <= b0, and f0 = a0 + 2n b0 is
    determined by them.
    """

    f0: float
    a0: float | None = None
    b0: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.f0):
            raise InvalidCase("f0 must be finite")
        if self.f0 > 0.0:
            raise InvalidCase(f"f0 must be <= 0, got {self.f0}")

    @classmethod
    def line_bundle(cls, f0: float) -> "ShootConfig":
        return cls(f0=float(f0))

    @classmethod
    def cone(cls, a0: float, b0: float, n: float) -> "ShootConfig":
        _validate_half_integer(n)
        if a0 > b0:
            raise InvalidCase(f"cone data needs a0 <= b0, got a0={a0}, b0={b0}")
        f0 = a0 + 2.0 * n * b0
        if f0 > 0.0:
            raise InvalidCase(f"cone data needs a0 + 2n b0 <= 0, got {f0}")
        return cls(f0=f0, a0=float(a0), b0=float(b0))


@dataclass(frozen=True, slots=True)
class SolitonState:
    """One point of a profile: arclength plus the first-order variables."""

    s: float
    a: float
    da: float
    b: float
    db: float
    f: float
    df: float

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.a, self.da, self.b, self.db, self.f, self.df)


@dataclass(frozen=True, slots=True)
class DerivativeVector:
    """Second derivatives (a'', b'', f'') at a state."""

    dda: float
    ddb: float
    ddf: float


@dataclass(frozen=True, slots=True)
class Diagnostics:
    """Derived scalars at a state.

    Q = a/b with its derivative dQ; R is the scalar curvature assembled
    from first-order data only; H is the conserved first-integral
    residual (zero on exact trajectories); the three Ricci entries are
    the orbit-normal, circle, and sphere components.
    """

    Q: float
    dQ: float
    R: float
    H: float
    ricci_normal: float
    ricci_circle: float
    ricci_sphere: float


def first_integral_constant(params: ModelParams, cfg: ShootConfig) -> float:
    """Constant value of f'' + (a'/a + 2n b'/b) f' - f'^2 along solutions.

    The combination is conserved; its value is the limit at s = 0, which
    depends on the branch through how many of a'/a, b'/b diverge like
    1/s there.  Line bundle (a ~ a1 s, b -> 1): f0 from f'' plus f0 from
    (a'/a) f', total 2 f0.  Cone (a ~ s, b ~ s): one copy from f'' and
    2n + 1 copies from the trace term, total (2n + 2) f0.
    """
    if params.branch is Branch.LINE_BUNDLE:
        return 2.0 * cfg.f0
    return (2.0 * params.n + 2.0) * cfg.f0


def _rhs(two_n: float, a: float, da: float, b: float, db: float,
         df: float) -> tuple[float, float, float]:
    """Second derivatives from first-order data; no validation, hot path."""
    inv_a = 1.0 / a
    inv_b = 1.0 / b
    q = a * inv_b
    dda = two_n * (q * q * q * inv_b - da * db * inv_b) + da * df
    ddb = ((two_n + 2.0) * inv_b
           - 2.0 * q * q * inv_b
           - da * db * inv_a
           - (two_n - 1.0) * db * db * inv_b
           + db * df)
    ddf = dda * inv_a + two_n * ddb * inv_b
    return dda, ddb, ddf


def eval_rhs(state: SolitonState, params: ModelParams,
             cfg: ShootConfig | None = None) -> DerivativeVector:
    """Evaluate the second-order system at a state with a, b > 0.

    cfg is accepted for interface symmetry with diagnostics(); the right
    hand side itself does not depend on the boundary data.
    """
    if not (state.a > 0.0 and state.b > 0.0):
        raise DegenerateState(
            f"rhs needs a > 0 and b > 0, got a={state.a}, b={state.b} at s={state.s}")
    dda, ddb, ddf = _rhs(2.0 * params.n, state.a, state.da, state.b,
                         state.db, state.df)
    return DerivativeVector(dda=dda, ddb=ddb, ddf=ddf)


def q_ratio(state: SolitonState) -> tuple[float, float]:
    """Return (Q, Q') = (a/b, (a'b - a b')/b^2)."""
    if not state.b > 0.0:
        raise DegenerateState(f"Q needs b > 0, got b={state.b} at s={state.s}")
    q = state.a / state.b
    dq = (state.da - q * state.db) / state.b
    return q, dq


def diagnostics(state: SolitonState, params: ModelParams,
                cfg: ShootConfig) -> Diagnostics:
    """Derived scalars at an interior state (a, b > 0).

    Near s = 0 the Ricci entries are 0/0 limits; use the jet-based limit
    helper in the series module instead of calling this at the origin.
    """
    if not (state.a > 0.0 and state.b > 0.0):
        raise DegenerateState(
            f"diagnostics needs a > 0 and b > 0, got a={state.a}, b={state.b}"
            f" at s={state.s}")
    n = params.n
    two_n = 2.0 * n
    a, da, b, db, df = state.a, state.da, state.b, state.db, state.df
    q, dq = q_ratio(state)

    # scalar curvature from first-order data only
    r = (two_n * a * a / b ** 4
         - two_n * (two_n + 2.0) / (b * b)
         + 4.0 * n * da * db / (a * b)
         + two_n * (two_n - 1.0) * (db / b) ** 2
         - 2.0 * df * (da / a + two_n * db / b))

    dda, ddb, ddf = _rhs(two_n, a, da, b, db, df)
    h = (ddf + (da / a + two_n * db / b) * df - df * df
         - first_integral_constant(params, cfg))

    ricci_normal = -dda / a - two_n * ddb / b
    ricci_circle = -dda / a + two_n * (a * a / b ** 4 - da * db / (a * b))
    ricci_sphere = (-ddb / b + (two_n + 2.0) / (b * b) - 2.0 * a * a / b ** 4
                    - da * db / (a * b) - (two_n - 1.0) * (db / b) ** 2)

    return Diagnostics(Q=q, dQ=dq, R=r, H=h, ricci_normal=ricci_normal,
                       ricci_circle=ricci_circle, ricci_sphere=ricci_sphere)
