"""Endpoint classification, deficiency indices and principal/nonprincipal pairs.

Integrability near an endpoint is decided from *shell increments*: the
integral over [e + s/2, e + s] for s = s0 2^-k.  A power law s^m in the
integrand gives increments with constant ratio 2^-(m+1); the tail
converges iff that ratio is below 1.  A logarithmically divergent tail
(m = -1) gives ratio exactly 1, so the divergence threshold sits just
below 1 and the convergence threshold just below that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import families
from .coeffs import SLProblem
from .errors import (IndeterminateError, IntegrationError, LimitPointError, NotBoundedBelow,
                     NumericalQualityError)
from .families import LIMIT_CIRCLE, LIMIT_POINT, REGULAR
from .quasi_ode import (DEFAULT_ATOL, DEFAULT_RTOL, approach_distances, integrate_solution,
                        seed_distance)

CONVERGENT_BELOW = 0.999
DIVERGENT_ABOVE = 0.9999
TAIL_LEVELS = 6

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class TailVerdict:
    verdict: str  # "convergent" | "divergent" | "indeterminate"
    ratios: tuple[float, ...]

    def as_dict(self):
        return {"verdict": self.verdict, "ratios": list(self.ratios)}


@dataclass(frozen=True)
class EndpointClass:
    end: str
    kind: str  # Regular | LimitCircle | LimitPoint
    evidence: dict = field(default_factory=dict)
    method: str = "closed"

    @property
    def quasi_regular(self) -> bool:
        return self.kind in (REGULAR, LIMIT_CIRCLE)


@dataclass(frozen=True)
class DeficiencyIndex:
    value: int
    classes: tuple[EndpointClass, EndpointClass]


@dataclass(frozen=True, eq=False)
class SolutionPair:
    """Principal u and nonprincipal u_hat at ``end`` with W(u_hat, u) = 1."""

    end: str
    lam0: float
    principal: object
    nonprincipal: object
    wronskian: float
    normalization: str
    method: str = "closed"

    def sample(self, problem: SLProblem, xs):
        from .quasi_ode import SolutionSample, Trajectory
        out = []
        for sol in (self.principal, self.nonprincipal):
            da, db = problem.distances(np.asarray(xs, dtype=float))
            u, uq = sol.eval(da, db)
            out.append(Trajectory(tuple(SolutionSample(float(x), float(a), float(b))
                                        for x, a, b in zip(np.atleast_1d(xs), np.atleast_1d(u), np.atleast_1d(uq))),
                                  self.lam0, self.end))
        return tuple(out)


# ---------------------------------------------------------------- verdicts

def tail_verdict(increments, levels: int = TAIL_LEVELS) -> TailVerdict:
    inc = np.abs(np.asarray(increments, dtype=float))
    tail = inc[-(levels + 1):]
    if np.all(tail <= 1e-300):
        return TailVerdict("convergent", ())
    if np.any(tail <= 1e-300) and tail[-1] <= 1e-300:
        return TailVerdict("convergent", ())
    ratios = tuple(float(b / a) if a > 0 else math.inf for a, b in zip(tail[:-1], tail[1:]))
    if max(ratios) < CONVERGENT_BELOW:
        return TailVerdict("convergent", ratios)
    if min(ratios) >= DIVERGENT_ABOVE:
        return TailVerdict("divergent", ratios)
    return TailVerdict("indeterminate", ratios)


def _levels(problem: SLProblem, end: str, rtol_scale: float = 1.0):
    """Shell radii s0 2^-k from the quarter point down to the closest safe distance."""
    L = problem.length
    s_min = max(seed_distance(problem, end) * 1e3, 1e-24 * L)
    k_max = int(math.floor(math.log2((L / 4) / s_min)))
    return (L / 4) * 2.0 ** -np.arange(k_max + 1)


def _shell_integrals(problem, end, f, radii):
    """int over [s_{k+1}, s_k] of f(x) dx for a distance function f(da, db)."""
    L = problem.length
    out = []
    for s_hi, s_lo in zip(radii[:-1], radii[1:]):
        t0, t1 = math.log(s_lo), math.log(s_hi)
        t = 0.5 * (t1 - t0) * _GL_NODES + 0.5 * (t1 + t0)
        s = np.exp(t)
        da, db = (s, L - s) if end == "a" else (L - s, s)
        out.append(0.5 * (t1 - t0) * float(np.sum(_GL_WEIGHTS * f(da, db) * s)))
    return np.array(out)


class _PairSystem:
    """Two solutions of tau u = lam u in log distance to ``end``."""

    def __init__(self, problem, lam, end):
        self.problem, self.lam, self.end = problem, lam, end
        self.sign = 1.0 if end == "a" else -1.0
        self.L = problem.length

    def __call__(self, t, y):
        s = math.exp(t)
        da, db = (s, self.L - s) if self.end == "a" else (self.L - s, s)
        p, q, r = (float(c) for c in self.problem.coefficients(da, db))
        f = self.sign * s
        out = np.empty_like(y)
        out[0::2] = f * y[1::2] / p
        out[1::2] = f * (q - self.lam * r) * y[0::2]
        return out


def _tail_profile(problem, end, lam, radii, data=((1.0, 0.0), (0.0, 1.0)), rtol=DEFAULT_RTOL):
    """Dense solutions from radius radii[0] inward to radii[-1]."""
    sys_ = _PairSystem(problem, lam, end)
    y0 = [data[0][0], data[0][1], data[1][0], data[1][1]]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        sol = solve_ivp(sys_, (math.log(radii[0]), math.log(radii[-1])), y0, method="DOP853",
                        rtol=rtol, atol=DEFAULT_ATOL, dense_output=True)
    if sol.status == -1:
        raise IntegrationError(f"tail integration failed: {sol.message}")
    return sol.sol


def _solution_shells(problem, end, dense, radii, j, weight):
    """Shell integrals of r u_j^2 (weight "r") or 1/(p u_j^2) (weight "p")."""
    def f(da, db):
        s = da if end == "a" else db
        u = np.array([dense(math.log(v))[2 * j] for v in np.atleast_1d(s)])
        p, q, r = problem.coefficients(da, db)
        return r * u * u if weight == "r" else 1.0 / (p * u * u)
    return _shell_integrals(problem, end, f, radii)


# ---------------------------------------------------------------- classify

def _numeric_class(problem: SLProblem, end: str, lam: float, rtol=DEFAULT_RTOL) -> EndpointClass:
    evidence = {}
    if problem.infinite(end):
        return _numeric_class_infinite(problem, end, lam, rtol)
    radii = _levels(problem, end)
    p_inv = lambda da, db: 1.0 / problem.coefficients(da, db)[0]
    absq = lambda da, db: np.abs(problem.coefficients(da, db)[1])
    rr = lambda da, db: problem.coefficients(da, db)[2]
    reg = {}
    for name, f in (("r", rr), ("1/p", p_inv), ("|q|", absq)):
        reg[name] = tail_verdict(_shell_integrals(problem, end, f, radii))
    evidence["regular_tests"] = {k: v.as_dict() for k, v in reg.items()}
    if all(v.verdict == "convergent" for v in reg.values()):
        return EndpointClass(end, REGULAR, evidence, "numeric")
    dense = _tail_profile(problem, end, lam, radii, rtol=rtol)
    verdicts = [tail_verdict(_solution_shells(problem, end, dense, radii, j, "r")) for j in (0, 1)]
    evidence["solution_tests"] = [v.as_dict() for v in verdicts]
    kinds = [v.verdict for v in verdicts]
    if "divergent" in kinds:
        return EndpointClass(end, LIMIT_POINT, evidence, "numeric")
    if all(k == "convergent" for k in kinds):
        return EndpointClass(end, LIMIT_CIRCLE, evidence, "numeric")
    raise IndeterminateError(f"cannot classify endpoint {end}: tail ratios {[v.ratios for v in verdicts]}")


def _numeric_class_infinite(problem, end, lam, rtol):
    """At an infinite end only LimitCircle/LimitPoint are possible; shells are equal length up to the cutoff."""
    L = problem.length
    n = 24
    # x runs from the midpoint outward to the cutoff
    mid = problem.lo + L / 2
    xs = np.linspace(mid, problem.hi if end == "b" else problem.lo, n + 1)

    def rhs(x, y):
        p, q, r = (float(c) for c in problem.coefficients(*problem.distances(x)))
        out = np.empty_like(y)
        out[0:4:2] = y[1:4:2] / p
        out[1:4:2] = (q - lam * r) * y[0:4:2]
        out[4:6] = r * y[0:4:2] ** 2 * (1 if end == "b" else -1)
        return out

    sol = solve_ivp(rhs, (xs[0], xs[-1]), [1, 0, 0, 1, 0, 0], method="DOP853", rtol=rtol,
                    atol=DEFAULT_ATOL, t_eval=xs)
    # u1^2 + u2^2 does not oscillate the way a single solution does
    both = tail_verdict(np.diff(sol.y[4] + sol.y[5]))
    evidence = {"solution_tests": [tail_verdict(np.diff(sol.y[j])).as_dict() for j in (4, 5)],
                "combined": both.as_dict(), "cutoff": problem.hi if end == "b" else problem.lo}
    if both.verdict == "divergent":
        return EndpointClass(end, LIMIT_POINT, evidence, "numeric")
    if both.verdict == "convergent":
        return EndpointClass(end, LIMIT_CIRCLE, evidence, "numeric")
    raise IndeterminateError(f"cannot classify infinite endpoint {end}: ratios {both.ratios}")


def classify_endpoint(problem: SLProblem, end: str, lam_probe: float = 0.0, method: str = "auto",
                      rtol: float = DEFAULT_RTOL) -> EndpointClass:
    """Regular / LimitCircle / LimitPoint at ``end``.

    ``method="auto"`` uses the closed-form tables for built-in families and
    numerics otherwise; ``"numeric"`` forces the shell diagnostics.
    """
    if end not in ("a", "b"):
        raise ValueError("end must be 'a' or 'b'")
    closed = families.closed_classes(problem)
    if method in ("auto", "closed") and closed is not None:
        kind = closed[0 if end == "a" else 1]
        return EndpointClass(end, kind, {"source": "closed form", "params": dict(
            (k, v) for k, v in problem.params.items() if isinstance(v, (int, float)))}, "closed")
    if method == "closed":
        raise ValueError("no closed-form classification for generic problems")
    return _numeric_class(problem, end, lam_probe, rtol)


def deficiency_index(problem: SLProblem, method: str = "auto") -> DeficiencyIndex:
    ca = classify_endpoint(problem, "a", method=method)
    cb = classify_endpoint(problem, "b", method=method)
    return DeficiencyIndex(int(ca.quasi_regular) + int(cb.quasi_regular), (ca, cb))


# ---------------------------------------------------------------- principal pairs

def _far_reach(problem):
    return float(approach_distances(problem)[-1]) / 4


def _check_pair(problem, end, u, uh, what):
    """W(u_hat, u) at a spread of points; returns the value at the midpoint."""
    L = problem.length
    ss = [L / 2, L / 8, float(approach_distances(problem)[-1])]
    vals, bad = [], False
    for s in ss:
        da, db = (s, L - s) if end == "a" else (L - s, s)
        a, aq = uh.eval(da, db)
        b, bq = u.eval(da, db)
        vals.append(float(a * bq - aq * b))
        # cancellation floor for growing solutions
        size = max(1.0, float(abs(a * bq) + abs(aq * b)))
        bad |= abs(vals[-1] - 1.0) > 1e-8 * size
    if bad:
        raise NumericalQualityError(f"{what}: W(u_hat, u) = {vals} is not 1")
    return vals[0]


def principal_pair(problem: SLProblem, end: str, lam0: float = 0.0, method: str = "auto",
                   rtol: float = DEFAULT_RTOL) -> SolutionPair:
    """Normalized principal/nonprincipal solutions of tau u = lam0 u at ``end``."""
    basis = families.null_basis(problem)
    if basis is not None and lam0 == 0.0 and method == "auto":
        (ua, uha), (ub, uhb) = basis.frames()
        u, uh = (ua, uha) if end == "a" else (ub, uhb)
        w = uh.wronskian_with(u)
        return SolutionPair(end, 0.0, u, uh, w, f"closed form ({problem.family})", "closed")
    return _numeric_pair(problem, end, lam0, rtol)


def _numeric_pair(problem, end, lam0, rtol):
    L = problem.length
    far = "b" if end == "a" else "a"
    mid = (L / 2, L / 2)
    if problem.infinite(end):
        # recessive solution: backward from the cutoff with Neumann data
        s0 = seed_distance(problem, end)
        start = (s0, L - s0) if end == "a" else (L - s0, s0)
        reach = {end: s0, far: _far_reach(problem)}
        u = integrate_solution(problem, lam0, start, [1.0, 0.0], reach=reach, rtol=rtol)
        _no_zero(problem, end, u)
        uc, _ = u.eval(*mid)
        uh = integrate_solution(problem, lam0, mid, [0.0, -1.0 / float(uc)], reach=reach, rtol=rtol)
        w = _check_pair(problem, end, u, uh, f"cutoff pair at {end}")
        return SolutionPair(end, lam0, u, uh, w,
                            "u seeded (1, 0) at the cutoff; u_hat(c) = 0, u_hat^[1](c) = -1/u(c) at the midpoint c",
                            "numeric")
    cls = classify_endpoint(problem, end, lam0, method="numeric" if problem.family == "generic" else "auto",
                            rtol=rtol)
    if cls.kind == REGULAR:
        s0 = seed_distance(problem, end)
        start = (s0, L - s0) if end == "a" else (L - s0, s0)
        reach = {end: s0, far: _far_reach(problem)}
        u = integrate_solution(problem, lam0, start, [0.0, 1.0], reach=reach, rtol=rtol)
        uh = integrate_solution(problem, lam0, start, [1.0, 0.0], reach=reach, rtol=rtol)
        w = _check_pair(problem, end, u, uh, f"regular pair at {end}")
        return SolutionPair(end, lam0, u, uh, w,
                            "canonical: (u, u^[1]) = (0, 1) and (u_hat, u_hat^[1]) = (1, 0) at the endpoint",
                            "numeric")
    # singular finite endpoint: nonprincipal from interior data, principal by the integral formula
    radii = (L / 2) * 2.0 ** -np.arange(int(math.log2((L / 2) / max(seed_distance(problem, end) * 1e3,
                                                                      1e-20 * L))) + 1)
    dense = _tail_profile(problem, end, lam0, radii, data=((1.0, 0.0), (0.0, 1.0)), rtol=rtol)
    v = np.array([dense(math.log(x))[0] for x in radii])
    tail_half = v[len(v) // 2:]
    if np.any(np.sign(tail_half[1:]) != np.sign(tail_half[:-1])):
        raise NotBoundedBelow(f"solutions oscillate at endpoint {end} for lam0 = {lam0:g}")
    inc = _solution_shells(problem, end, dense, radii, 0, "p")
    verdict = tail_verdict(inc)
    s_min = float(radii[-1])
    start_min = (s_min, L - s_min) if end == "a" else (L - s_min, s_min)
    reach = {end: s_min, far: _far_reach(problem)}
    if verdict.verdict == "convergent":
        rho = float(inc[-1] / inc[-2]) if inc[-2] != 0 else 0.0
        T = float(inc[-1]) * rho / (1.0 - rho) if 0 <= rho < 1 else 0.0
        sigma = 1.0 if end == "a" else -1.0
        vm, vqm = (float(c) for c in dense(math.log(s_min))[:2])
        uh = integrate_solution(problem, lam0, mid, [1.0, 0.0], reach=reach, rtol=rtol)
        u = integrate_solution(problem, lam0, start_min, [vm * sigma * T, vqm * sigma * T + 1.0 / vm],
                               reach=reach, rtol=rtol)
        how = ("u_hat(c) = 1, u_hat^[1](c) = 0 at the midpoint c; "
               "u = u_hat * int_end^x dx / (p u_hat^2)")
    elif verdict.verdict == "divergent":
        u = integrate_solution(problem, lam0, mid, [1.0, 0.0], reach=reach, rtol=rtol)
        uh = integrate_solution(problem, lam0, mid, [0.0, -1.0], reach=reach, rtol=rtol)
        how = "u(c) = 1, u^[1](c) = 0; u_hat(c) = 0, u_hat^[1](c) = -1 at the midpoint c"
    else:
        raise IndeterminateError(f"cannot decide the principal solution at {end}: ratios {verdict.ratios}")
    w = _check_pair(problem, end, u, uh, f"singular pair at {end}")
    return SolutionPair(end, lam0, u, uh, w, how, "numeric")


def _no_zero(problem, end, sol):
    L = problem.length
    ss = np.geomspace(L / 2, seed_distance(problem, end) * 10, 60)
    da, db = (ss, L - ss) if end == "a" else (L - ss, ss)
    u, _ = sol.eval(da, db)
    if np.any(np.sign(u[1:]) != np.sign(u[:-1])):
        raise NotBoundedBelow(f"recessive solution at {end} changes sign: oscillation")


def require_quasi_regular(cls: EndpointClass, what: str):
    if not cls.quasi_regular:
        raise LimitPointError(f"{what}: endpoint {cls.end} is limit point")
