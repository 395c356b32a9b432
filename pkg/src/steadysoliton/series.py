"""Taylor jets at the degenerate orbit.

The flow is singular at s = 0 (division by a and b), so integration
starts from a truncated power series instead.  Parity pins the shape of
the expansion on each branch:

  line bundle:  a odd,  b even (b(0) = 1),  f even
  cone:         a odd,  b odd,              f even

Multiplying the three equations by enough powers of a and b turns them
into polynomial identities

  P1 = f'' a b - a'' b - 2n b'' a
  P2 = a'' b^4 - 2n a^3 + 2n a' b' b^3 - a' f' b^4
  P3 = b'' a b^3 - (2n+2) a b^2 + 2 a^3 + a' b' b^3
       + (2n-1) b'^2 a b^2 - b' f' a b^3

whose coefficients must vanish order by order.  Beyond the forced
leading data each order contributes one new coefficient per function,
entering the residual coefficients linearly, so the recursion is a
sequence of small linear solves.  The solves are assembled here by
probing: evaluate the residual with a candidate coefficient set to 0 and
to 1; the difference is its (exact) linear weight.  That avoids
hand-maintained index bookkeeping and works unchanged on both branches.

A jet is only trusted on [0, handoffRadius], chosen so the last retained
term of every significant series is below 1e-14 of its leading term and
the pointwise ODE residual at the radius is below 1e-12 (1 + |f0|).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidCase, OutOfRadius, ResonanceFailure
from .model import (Branch, Diagnostics, ModelParams, ShootConfig,
                    SolitonState, diagnostics)

__all__ = [
    "SeriesJet",
    "build_line_bundle_jet",
    "build_cone_jet",
    "evaluate_jet",
    "jet_residual",
    "origin_diagnostics",
]

# last-term / leading-term contrast required at the handoff radius
_TERM_CONTRAST = 1e-14
# pointwise residual allowance at the handoff radius, times (1 + |f0|)
_RESIDUAL_LIMIT = 1e-12
# pivot threshold for the order-by-order linear solves
_PIVOT_FLOOR = 1e-14


@dataclass(frozen=True, slots=True)
class SeriesJet:
    """Truncated expansion of (a, b, f) about s = 0.

    Coefficient tuples are indexed by power of s and already respect the
    branch parity (off-parity entries are exactly zero).
    """

    branch: Branch
    order: int
    n: float
    a1: float
    f0: float
    a: tuple[float, ...]
    b: tuple[float, ...]
    f: tuple[float, ...]
    handoff_radius: float
    a0: float | None = None
    b0: float | None = None

    def to_json(self) -> str:
        payload = {
            "branch": self.branch.value,
            "order": self.order,
            "n": self.n,
            "a1": self.a1,
            "f0": self.f0,
            "a0": self.a0,
            "b0": self.b0,
            "a": list(self.a),
            "b": list(self.b),
            "f": list(self.f),
            "handoff_radius": self.handoff_radius,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SeriesJet":
        d = json.loads(text)
        return cls(branch=Branch(d["branch"]), order=int(d["order"]),
                   n=float(d["n"]), a1=float(d["a1"]), f0=float(d["f0"]),
                   a=tuple(d["a"]), b=tuple(d["b"]), f=tuple(d["f"]),
                   handoff_radius=float(d["handoff_radius"]),
                   a0=d["a0"], b0=d["b0"])


def _derive(c: np.ndarray) -> np.ndarray:
    """Coefficients of the derivative series (same length, shifted down)."""
    out = np.zeros_like(c)
    k = np.arange(1, c.size)
    out[:-1] = k * c[1:]
    return out


def _mul(x: np.ndarray, y: np.ndarray, kmax: int) -> np.ndarray:
    return np.convolve(x, y)[: kmax + 1]


def _poly_residuals(a: np.ndarray, b: np.ndarray, f: np.ndarray,
                    two_n: float, kmax: int) -> np.ndarray:
    """Stack of the three polynomial residual series up to order kmax."""
    da, db, df = _derive(a), _derive(b), _derive(f)
    dda, ddb, ddf = _derive(da), _derive(db), _derive(df)

    b2 = _mul(b, b, kmax)
    b3 = _mul(b2, b, kmax)
    b4 = _mul(b2, b2, kmax)
    ab = _mul(a, b, kmax)
    a3 = _mul(_mul(a, a, kmax), a, kmax)
    ab2 = _mul(a, b2, kmax)
    ab3 = _mul(a, b3, kmax)
    dadb = _mul(da, db, kmax)

    p1 = (_mul(ddf, ab, kmax) - _mul(dda, b, kmax)
          - two_n * _mul(ddb, a, kmax))
    p2 = (_mul(dda, b4, kmax) - two_n * a3
          + two_n * _mul(dadb, b3, kmax) - _mul(_mul(da, df, kmax), b4, kmax))
    p3 = (_mul(ddb, ab3, kmax) - (two_n + 2.0) * ab2 + 2.0 * a3
          + _mul(dadb, b3, kmax)
          + (two_n - 1.0) * _mul(_mul(db, db, kmax), ab2, kmax)
          - _mul(_mul(db, df, kmax), ab3, kmax))
    return np.stack([p1, p2, p3])


def _solve_level(series: dict[str, np.ndarray], unknowns, rows,
                 two_n: float, kmax: int) -> None:
    """Fill the level's coefficients by linearity probing.

    unknowns: list of (series key, index); rows: list of (eq, order)
    picking which residual coefficients must vanish.  The residual is
    affine in the unknowns, so two evaluations per unknown recover the
    exact linear system.
    """
    def residual_rows() -> np.ndarray:
        p = _poly_residuals(series["a"], series["b"], series["f"], two_n, kmax)
        return np.array([p[eq][order] for eq, order in rows])

    r0 = residual_rows()
    m = np.zeros((len(rows), len(unknowns)))
    for j, (key, idx) in enumerate(unknowns):
        series[key][idx] = 1.0
        m[:, j] = residual_rows() - r0
        series[key][idx] = 0.0

    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] < _PIVOT_FLOOR * max(1.0, sv[0]):
        raise ResonanceFailure(
            f"series recursion pivot {sv[-1]:.3e} below threshold at "
            f"orders {[o for _, o in rows]}")
    sol = np.linalg.solve(m, -r0)
    for (key, idx), value in zip(unknowns, sol):
        series[key][idx] = value


def _series_max(c: np.ndarray) -> float:
    return float(np.max(np.abs(c))) if c.size else 0.0


def _handoff_radius(jet_arrays: dict[str, np.ndarray], leads: dict[str, int],
                    a1: float, f0: float, n: float, branch: Branch) -> float:
    """Largest certified radius: term-contrast rule, then residual check."""
    radius = 0.1 / max(1.0, a1)
    scale = max(1.0, *(_series_max(c) for c in jet_arrays.values()))
    for key, c in jet_arrays.items():
        if _series_max(c) <= 1e-12 * scale:
            continue  # numerically zero series (e.g. f when f0 = 0)
        lead = leads[key]
        nonzero = np.nonzero(np.abs(c) > 1e-12 * _series_max(c))[0]
        last = int(nonzero[-1])
        if last <= lead:
            continue  # pure leading term, exact at any radius
        ratio = _TERM_CONTRAST * abs(c[lead]) / abs(c[last])
        radius = min(radius, ratio ** (1.0 / (last - lead)))

    limit = _RESIDUAL_LIMIT * (1.0 + abs(f0))
    probe = _RawJet(jet_arrays["a"], jet_arrays["b"], jet_arrays["f"], n)
    for _ in range(80):
        if probe.residual(radius) <= limit:
            return radius
        radius *= 0.7
    raise ResonanceFailure(
        f"handoff radius collapsed without meeting the residual bound "
        f"{limit:.3e}; series recursion is inconsistent")


class _RawJet:
    """Unchecked polynomial evaluation used while the jet is being built."""

    def __init__(self, a: np.ndarray, b: np.ndarray, f: np.ndarray, n: float):
        self.a, self.b, self.f = a, b, f
        self.da, self.db, self.df = _derive(a), _derive(b), _derive(f)
        self.dda, self.ddb = _derive(self.da), _derive(self.db)
        self.ddf = _derive(self.df)
        self.two_n = 2.0 * n

    def state(self, s: float) -> SolitonState:
        ev = lambda c: float(np.polynomial.polynomial.polyval(s, c))
        return SolitonState(s=s, a=ev(self.a), da=ev(self.da), b=ev(self.b),
                            db=ev(self.db), f=ev(self.f), df=ev(self.df))

    def residual(self, s: float) -> float:
        """Max pointwise residual of the three polynomial-form equations.

        The multiplied forms P1, P2, P3 are the ones the recursion
        zeroes order by order, so this residual is division-free and
        scales with the first untouched order.
        """
        ev = lambda c: float(np.polynomial.polynomial.polyval(s, c))
        a, da, dda = ev(self.a), ev(self.da), ev(self.dda)
        b, db, ddb = ev(self.b), ev(self.db), ev(self.ddb)
        df, ddf = ev(self.df), ev(self.ddf)
        two_n = self.two_n
        p1 = ddf * a * b - dda * b - two_n * ddb * a
        p2 = (dda * b ** 4 - two_n * a ** 3 + two_n * da * db * b ** 3
              - da * df * b ** 4)
        p3 = (ddb * a * b ** 3 - (two_n + 2.0) * a * b * b + 2.0 * a ** 3
              + da * db * b ** 3 + (two_n - 1.0) * db * db * a * b * b
              - db * df * a * b ** 3)
        return max(abs(p1), abs(p2), abs(p3))


def build_line_bundle_jet(params: ModelParams, cfg: ShootConfig,
                          order: int = 10) -> SeriesJet:
    """Jet leaving the zero-section orbit: a = a1 s + ..., b = 1 + ...

    The forced data are a1 = (n+1)k/p, b(0) = 1, b''(0) = n+1 and
    f''(0) = f0; everything above follows from the recursion.
    """
    if params.branch is not Branch.LINE_BUNDLE:
        raise InvalidCase("params are not line-bundle branch")
    if order < 5:
        raise InvalidCase(f"jet order must be >= 5, got {order}")
    n, a1, f0 = params.n, params.a1, cfg.f0
    two_n = 2.0 * n
    size = order + 1
    series = {"a": np.zeros(size), "b": np.zeros(size), "f": np.zeros(size)}
    series["a"][1] = a1
    series["b"][0] = 1.0
    series["b"][2] = (n + 1.0) / 2.0
    series["f"][2] = f0 / 2.0

    kmax = order + 2
    _solve_level(series, [("a", 3)], [(1, 1)], two_n, kmax)
    m = 3
    while m + 2 <= order:
        _solve_level(series,
                     [("a", m + 2), ("b", m + 1), ("f", m + 1)],
                     [(0, m), (1, m), (2, m)], two_n, kmax)
        m += 2

    leads = {"a": 1, "b": 0, "f": 2}
    radius = _handoff_radius(series, leads, a1, f0, n, Branch.LINE_BUNDLE)
    return SeriesJet(branch=Branch.LINE_BUNDLE, order=order, n=n, a1=a1,
                     f0=f0, a=tuple(series["a"]), b=tuple(series["b"]),
                     f=tuple(series["f"]), handoff_radius=radius)


def build_cone_jet(params: ModelParams, cfg: ShootConfig,
                   order: int = 10) -> SeriesJet:
    """Jet leaving the cone point: a = s + a0 s^3/6 + ..., b likewise.

    Free data are the third derivatives a0 <= b0 with a0 + 2n b0 <= 0;
    the potential is forced to f''(0) = a0 + 2n b0.  The first solved
    level is (a5, b5, f4); below that every residual order vanishes
    identically, which the handoff residual check re-verifies.
    """
    if params.branch is not Branch.CONE:
        raise InvalidCase("params are not cone branch")
    if cfg.a0 is None or cfg.b0 is None:
        raise InvalidCase("cone jet needs cfg with a0 and b0")
    if order < 5:
        raise InvalidCase(f"jet order must be >= 5, got {order}")
    n, a0, b0 = params.n, cfg.a0, cfg.b0
    two_n = 2.0 * n
    size = max(order + 1, 6)
    series = {"a": np.zeros(size), "b": np.zeros(size), "f": np.zeros(size)}
    series["a"][1] = 1.0
    series["b"][1] = 1.0
    series["a"][3] = a0 / 6.0
    series["b"][3] = b0 / 6.0
    series["f"][2] = (a0 + two_n * b0) / 2.0

    kmax = order + 4
    j = 2
    while 2 * j + 1 <= order:
        _solve_level(series,
                     [("a", 2 * j + 1), ("b", 2 * j + 1), ("f", 2 * j)],
                     [(0, 2 * j), (1, 2 * j + 3), (2, 2 * j + 3)],
                     two_n, kmax)
        j += 1

    for key in series:
        series[key] = series[key][: order + 1]
    leads = {"a": 1, "b": 1, "f": 2}
    radius = _handoff_radius(series, leads, 1.0, cfg.f0, n, Branch.CONE)
    return SeriesJet(branch=Branch.CONE, order=order, n=n, a1=1.0, f0=cfg.f0,
                     a=tuple(series["a"]), b=tuple(series["b"]),
                     f=tuple(series["f"]), handoff_radius=radius,
                     a0=a0, b0=b0)


def evaluate_jet(jet: SeriesJet, s: float) -> SolitonState:
    """State at |s| <= handoffRadius from the stored coefficients.

    Negative arguments are allowed so parity can be exercised directly;
    the positivity guarantees only apply on the positive side.
    """
    if abs(s) > jet.handoff_radius:
        raise OutOfRadius(
            f"|s|={abs(s):.6e} beyond handoff radius {jet.handoff_radius:.6e}")
    raw = _RawJet(np.asarray(jet.a), np.asarray(jet.b), np.asarray(jet.f),
                  jet.n)
    return raw.state(s)


def jet_residual(jet: SeriesJet, s: float, params: ModelParams,
                 cfg: ShootConfig | None = None) -> float:
    """Max absolute residual of the three equations at s, all from the jet.

    The residual is taken in the polynomial (multiplied) form that the
    recursion solves, so it needs no division by a or b.  On the
    line-bundle branch it scales like s^(order-1) as s -> 0; on the cone
    branch the extra vanishing of b pushes the first untouched order one
    higher.
    """
    if params.n != jet.n:
        raise InvalidCase(f"params.n={params.n} does not match jet.n={jet.n}")
    raw = _RawJet(np.asarray(jet.a), np.asarray(jet.b), np.asarray(jet.f),
                  jet.n)
    return raw.residual(s)


def origin_diagnostics(jet: SeriesJet, params: ModelParams,
                       cfg: ShootConfig) -> Diagnostics:
    """s -> 0 limit of the diagnostics along the jet.

    The curvature entries are 0/0 at the degenerate orbit; all of them
    are even in s, so two jet evaluations inside the handoff radius and
    one Richardson step give the limit to O(radius^4).  Q and dQ have
    branch-dependent parity and known limits, which are filled directly.
    """
    h = jet.handoff_radius
    d2 = diagnostics(evaluate_jet(jet, h / 2.0), params, cfg)
    d4 = diagnostics(evaluate_jet(jet, h / 4.0), params, cfg)
    rich = lambda f4, f2: (4.0 * f4 - f2) / 3.0
    if jet.branch is Branch.LINE_BUNDLE:
        q0, dq0 = 0.0, jet.a1
    else:
        q0, dq0 = 1.0, 0.0
    return Diagnostics(
        Q=q0, dQ=dq0,
        R=rich(d4.R, d2.R),
        H=rich(d4.H, d2.H),
        ricci_normal=rich(d4.ricci_normal, d2.ricci_normal),
        ricci_circle=rich(d4.ricci_circle, d2.ricci_circle),
        ricci_sphere=rich(d4.ricci_sphere, d2.ricci_sphere),
    )
