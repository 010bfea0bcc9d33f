"""Integration of the quasi-derivative system

    u' = u^[1] / p,    (u^[1])' = (q - z r) u,

together with Wronskians and the reduction-of-order formula.

Every path is integrated in logarithmic distance coordinates: on the
half of the interval nearest the endpoint ``e`` the independent variable
is ``t = ln(s)`` where ``s`` is the distance to ``e``.  Paths that cross
the midpoint switch coordinates there.  Coefficients are therefore never
evaluated at an endpoint, and the step size adapts naturally to power
law behaviour at singular ends.

A second mode integrates *frame coordinates* (A, B) with
g = A*u_hat + B*u for a reference pair (u, u_hat) solving tau u = lam0 u.
For g solving tau g = lam g,

    A' = (lam - lam0) r u g,    B' = -(lam - lam0) r u_hat g,

so (A, B) tends to the generalized boundary values (g~, g~') at the
endpoint and stays bounded even where g itself blows up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .coeffs import SLProblem
from .errors import DomainError, IntegrationError

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
SEED_SCALE_FLOOR = 1e-30


@dataclass(frozen=True)
class SolutionSample:
    x: float
    u: float
    uq: float


@dataclass(frozen=True)
class Trajectory:
    """Samples of one solution, ordered by increasing x."""

    samples: tuple[SolutionSample, ...]
    z: float
    orientation: str  # "a", "b" or "both": direction(s) integrated from the seed

    @property
    def x(self) -> np.ndarray:
        return np.array([s.x for s in self.samples])

    @property
    def u(self) -> np.ndarray:
        return np.array([s.u for s in self.samples])

    @property
    def uq(self) -> np.ndarray:
        return np.array([s.uq for s in self.samples])

    def at(self, x: float) -> SolutionSample:
        for s in self.samples:
            if s.x == x:
                return s
        raise KeyError(x)


def wronskian(f: SolutionSample, g: SolutionSample) -> float:
    """W(f, g) = f g^[1] - f^[1] g at a shared abscissa."""
    if f.x != g.x:
        raise DomainError(f"Wronskian needs a common abscissa, got {f.x!r} and {g.x!r}")
    return f.u * g.uq - f.uq * g.u


# ----------------------------------------------------------------- geometry

def half_of(problem: SLProblem, da, db) -> str:
    return "a" if da <= db else "b"


def seed_distance(problem: SLProblem, end: str) -> float:
    """Closest approach to an endpoint used for seeding."""
    L = problem.length
    if problem.family != "generic":
        return 1e-30 * L
    endpoint = problem.lo if end == "a" else problem.hi
    return max(1e-30 * L, 16 * np.finfo(float).eps * abs(endpoint))


APPROACH_DEPTH = 20


def approach_distances(problem: SLProblem, k_max: int = APPROACH_DEPTH, eps: float = 1e-2) -> np.ndarray:
    """s_k = eps * L * 2^-k, the endpoint approach sequence."""
    return eps * problem.length * 2.0 ** -np.arange(k_max + 1)


def _point(problem, half, t):
    s = math.exp(t)
    L = problem.length
    return (s, L - s) if half == "a" else (L - s, s)


def _coord(problem, da, db):
    half = half_of(problem, da, db)
    return half, math.log(da if half == "a" else db)


# ----------------------------------------------------------------- systems

class _System:
    """Right-hand side in log coordinates for several columns at once."""

    def __init__(self, problem, lam, half, mode="quasi", frame=None, lam0=0.0, extra=False):
        self.problem, self.lam, self.half = problem, lam, half
        self.mode, self.frame, self.lam0 = mode, frame, lam0
        self.sign = 1.0 if half == "a" else -1.0
        self.L = problem.length
        self.extra = extra  # append K' = 1/(p u^2) for the first column

    def __call__(self, t, y):
        s = math.exp(t)
        da, db = (s, self.L - s) if self.half == "a" else (self.L - s, s)
        p, q, r = self.problem.coefficients(da, db)
        p, q, r = float(p), float(q), float(r)
        f = self.sign * s
        n = len(y) - (1 if self.extra else 0)
        out = np.empty_like(y)
        if self.mode == "quasi":
            out[0:n:2] = f * y[1:n:2] / p
            out[1:n:2] = f * (q - self.lam * r) * y[0:n:2]
        else:
            u, uq = self.frame[0].eval(da, db)
            v, vq = self.frame[1].eval(da, db)
            u, v = float(u), float(v)
            g = y[0:n:2] * v + y[1:n:2] * u
            c = f * (self.lam - self.lam0) * r
            out[0:n:2] = c * u * g
            out[1:n:2] = -c * v * g
        if self.extra:
            out[-1] = f / (p * y[0] * y[0])
        return out

    def to_quasi(self, t, y):
        """Convert frame coordinates (A, B) to (g, g^[1])."""
        if self.mode == "quasi":
            return y
        da, db = _point(self.problem, self.half, t)
        u, uq = self.frame[0].eval(da, db)
        v, vq = self.frame[1].eval(da, db)
        out = np.array(y, dtype=float)
        A, B = y[0::2], y[1::2]
        out[0::2] = A * float(v) + B * float(u)
        out[1::2] = A * float(vq) + B * float(uq)
        return out


def solve_segment(system: _System, t0, t1, y0, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
                  dense=False, t_eval=None, events=None):
    """Run the integrator and translate failures into :class:`IntegrationError`."""
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise IntegrationError(f"non-finite initial data {y0.tolist()}", float("nan"))
    # absolute tolerance relative to the smallest nonzero seed component, so
    # tiny principal-solution seeds are resolved; the floor keeps a near-zero
    # (even subnormal) component from stalling the step-size control
    nz = np.abs(y0[y0 != 0])
    scale = max(float(np.min(nz)), SEED_SCALE_FLOOR * float(np.max(nz))) if nz.size else 1.0
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        lo, hi = min(t0, t1), max(t0, t1)
        t_eval = np.clip(t_eval, lo, hi)
    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve_ivp(system, (t0, t1), y0, method="DOP853", rtol=rtol, atol=atol * scale,
                        dense_output=dense, t_eval=t_eval, events=events)
    if sol.status == -1 or not np.all(np.isfinite(sol.y)):
        t_fail = sol.t[-1] if sol.t.size else t0
        da, db = _point(system.problem, system.half, t_fail)
        x = float(system.problem.x_at(da, db))
        raise IntegrationError(f"integration failed near x = {x:.12g} (lam = {system.lam:g}): {sol.message}", x)
    return sol


# ----------------------------------------------------------------- solutions

@dataclass
class _Piece:
    half: str
    t_lo: float
    t_hi: float
    sol: object
    system: _System


@dataclass
class NumericSolution:
    """A solution known through dense output on log-coordinate pieces."""

    lam: float
    pieces: list = field(default_factory=list)
    scale: float = 1.0
    shift: tuple | None = None  # (other solution, c): self + c*other

    def covers(self, da, db) -> bool:
        half, t = _coord_safe(da, db)
        return any(pc.half == half and pc.t_lo - 1e-9 <= t <= pc.t_hi + 1e-9 for pc in self.pieces)

    def _eval1(self, da, db):
        half = "a" if da <= db else "b"
        t = math.log(da if half == "a" else db)
        best = next((pc for pc in self.pieces
                     if pc.half == half and pc.t_lo - 1e-9 <= t <= pc.t_hi + 1e-9), None)
        if best is None:
            raise DomainError(f"solution not available at x with distances ({da:.3e}, {db:.3e})")
        y = best.sol(min(max(t, best.t_lo), best.t_hi))
        y = best.system.to_quasi(t, y[:2])
        return y[0] * self.scale, y[1] * self.scale

    def eval(self, da, db):
        da = np.asarray(da, dtype=float)
        db = np.broadcast_to(np.asarray(db, dtype=float), da.shape)
        out = np.array([self._eval1(float(a), float(b)) for a, b in zip(da.ravel(), db.ravel())])
        u = out[:, 0].reshape(da.shape)
        uq = out[:, 1].reshape(da.shape)
        if self.shift is not None:
            other, c = self.shift
            ou, ouq = other.eval(da, db)
            u, uq = u + c * ou, uq + c * ouq
        return u, uq

    def scaled(self, c: float) -> "NumericSolution":
        return NumericSolution(self.lam, self.pieces, self.scale * c,
                               None if self.shift is None else (self.shift[0], self.shift[1] * c))

    def shifted(self, other, c: float) -> "NumericSolution":
        """self + c * other."""
        if self.shift is not None:
            raise ValueError("solution already shifted")
        return NumericSolution(self.lam, self.pieces, self.scale, (other, c))


def _coord_safe(da, db):
    half = "a" if da <= db else "b"
    return half, math.log(da if half == "a" else db)


def integrate_solution(problem: SLProblem, lam: float, start, y0, *, reach=None,
                       mode="quasi", frame=None, lam0=0.0, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Dense solution through ``start`` = (da, db) with data ``y0``.

    ``reach`` maps each half to the closest endpoint distance to cover
    (default: the seed distance).  Frame mode stays on the starting half.
    """
    L = problem.length
    reach = dict(reach or {})
    reach.setdefault("a", seed_distance(problem, "a"))
    reach.setdefault("b", seed_distance(problem, "b"))
    half0, t0 = _coord(problem, *start)
    tc = math.log(L / 2)
    sol = NumericSolution(lam)
    y0 = np.asarray(y0, dtype=float)
    sysA = _System(problem, lam, half0, mode, frame, lam0)
    # toward the own endpoint
    t_end = math.log(reach[half0])
    if t_end < t0:
        r = solve_segment(sysA, t0, t_end, y0, rtol=rtol, atol=atol, dense=True)
        sol.pieces.append(_Piece(half0, t_end, t0, r.sol, sysA))
    # toward the midpoint and beyond
    if t0 < tc:
        r = solve_segment(sysA, t0, tc, y0, rtol=rtol, atol=atol, dense=True)
        sol.pieces.append(_Piece(half0, t0, tc, r.sol, sysA))
        yc = sysA.to_quasi(tc, r.y[:, -1])
    else:
        yc = sysA.to_quasi(t0, y0)
    if mode == "quasi" or frame is None:
        other = "b" if half0 == "a" else "a"
        sysB = _System(problem, lam, other)
        t_far = math.log(reach[other])
        if t_far < tc:
            r = solve_segment(sysB, tc, t_far, yc, rtol=rtol, atol=atol, dense=True)
            sol.pieces.append(_Piece(other, t_far, tc, r.sol, sysB))
    return sol


# ----------------------------------------------------------------- public API

def integrate_ivp(problem: SLProblem, z: float, x0: float, u0: float, uq0: float,
                  targets: Sequence[float], *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> Trajectory:
    """Solve (tau - z) u = 0 with u(x0) = u0, u^[1](x0) = uq0 and sample at ``targets``."""
    lo, hi = problem.lo, problem.hi
    pts = [float(x0)] + [float(t) for t in targets]
    for x in pts:
        if not (lo < x < hi) and not (x == lo and not math.isfinite(problem.a)):
            raise DomainError(f"x = {x!r} is not inside the numerical domain ({lo}, {hi})")
    da0, db0 = problem.distances(x0)
    start = (float(da0), float(db0))
    L = problem.length
    reach = {"a": L / 2, "b": L / 2}
    for x in targets:
        da, db = problem.distances(x)
        half = half_of(problem, da, db)
        reach[half] = min(reach[half], float(da if half == "a" else db))
    sol = integrate_solution(problem, z, start, [u0, uq0], reach=reach, rtol=rtol, atol=atol)
    samples = []
    for x in sorted(float(t) for t in targets):
        da, db = problem.distances(x)
        u, uq = sol.eval(da, db)
        samples.append(SolutionSample(x, float(u), float(uq)))
    xs = [float(t) for t in targets]
    if all(x > x0 for x in xs):
        orient = "b"
    elif all(x < x0 for x in xs):
        orient = "a"
    else:
        orient = "both"
    return Trajectory(tuple(samples), float(z), orient)


def second_solution(problem: SLProblem, y1: Trajectory, c: float, *, rtol=DEFAULT_RTOL,
                    atol=DEFAULT_ATOL) -> Trajectory:
    """y2(x) = y1(x) * int_c^x dt / (p y1^2), sampled on y1's abscissae; W(y1, y2) = 1.

    y1 is re-integrated from its first sample together with the running
    integral, so the quadrature is as accurate as the ODE solve.
    """
    xs = y1.x
    first = y1.samples[0]
    if not (problem.lo < c < problem.hi):
        raise DomainError(f"anchor c = {c!r} is not interior")
    grid = sorted(set(xs.tolist()) | {float(c)})
    dense = integrate_ivp(problem, y1.z, first.x, first.u, first.uq,
                          [x for x in grid if x != first.x] or [first.x + 0.0], rtol=rtol, atol=atol)
    vals = {s.x: s for s in dense.samples}
    vals[first.x] = first
    ys = np.array([vals[x].u for x in grid])
    sign_change = np.flatnonzero(np.sign(ys[1:]) != np.sign(ys[:-1]))
    if np.any(ys == 0) or sign_change.size:
        i = int(np.flatnonzero(ys == 0)[0]) if np.any(ys == 0) else int(sign_change[0])
        raise DomainError(f"y1 vanishes near x = {grid[i]:.12g}; reduction formula needs a nonvanishing solution")
    # int_c^x dt/(p y1^2) by integrating K' = 1/(p y1^2) alongside y1 from c
    yc = vals[float(c)]
    out = []
    for x in xs:
        K = _reduction_integral(problem, y1.z, c, (yc.u, yc.uq), x, rtol, atol)
        s = vals[float(x)]
        out.append(SolutionSample(float(x), s.u * K, s.uq * K + 1.0 / s.u))
    return Trajectory(tuple(out), y1.z, y1.orientation)


def _reduction_integral(problem, lam, c, yc, x, rtol, atol):
    if x == c:
        return 0.0
    L = problem.length
    dac, dbc = problem.distances(c)
    dax, dbx = problem.distances(x)
    hc, tcoord = _coord(problem, float(dac), float(dbc))
    hx, txcoord = _coord(problem, float(dax), float(dbx))
    tmid = math.log(L / 2)
    y = np.array([yc[0], yc[1], 0.0])
    if hc == hx:
        sys_ = _System(problem, lam, hc, extra=True)
        r = solve_segment(sys_, tcoord, txcoord, y, rtol=rtol, atol=atol)
        return float(r.y[2, -1])
    sys1 = _System(problem, lam, hc, extra=True)
    r = solve_segment(sys1, tcoord, tmid, y, rtol=rtol, atol=atol)
    sys2 = _System(problem, lam, hx, extra=True)
    r = solve_segment(sys2, tmid, txcoord, r.y[:, -1], rtol=rtol, atol=atol)
    return float(r.y[2, -1])
