"""Generalized boundary values as Wronskian limits.

At a quasi-regular endpoint ``e`` with principal u and nonprincipal
u_hat (W(u_hat, u) = 1):

    g~(e)  = -lim W(u, g)(x),      g~'(e) = lim W(u_hat, g)(x),   x -> e.

The limits are evaluated on the sequence e + eps L 2^-k (k = 0..12) and
accelerated with Wynn's epsilon algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .classify import EndpointClass, SolutionPair, classify_endpoint, principal_pair
from .coeffs import SLProblem
from .errors import MathematicalRefusal, NotInMaximalDomain, NumericalFailure
from .expr import Expression
from .families import BasisSolution
from .quasi_ode import APPROACH_DEPTH, approach_distances


@dataclass(frozen=True, eq=False)
class BoundaryFrame:
    """Principal/nonprincipal pairs at the quasi-regular ends.

    ``seeds`` additionally holds principal pairs at finite limit-point ends
    when they can be built; spectral shooting uses them to impose the
    implicit limit-point condition.
    """

    problem: SLProblem
    lam0: float
    a: SolutionPair | None
    b: SolutionPair | None
    classes: tuple[EndpointClass, EndpointClass]
    seeds: dict = field(default_factory=dict)

    def pair(self, end: str) -> SolutionPair | None:
        return self.a if end == "a" else self.b

    def cls(self, end: str) -> EndpointClass:
        return self.classes[0 if end == "a" else 1]

    @property
    def deficiency(self) -> int:
        return sum(c.quasi_regular for c in self.classes)

    def describe(self) -> dict:
        out = {"lam0": self.lam0}
        for end in "ab":
            pr = self.pair(end)
            out[end] = {"class": self.cls(end).kind,
                        "normalization": None if pr is None else pr.normalization,
                        "wronskian": None if pr is None else pr.wronskian}
        return out


def boundary_frame(problem: SLProblem, lam0: float = 0.0, method: str = "auto") -> BoundaryFrame:
    """Assemble the frame from :func:`principal_pair` at each quasi-regular end."""
    classes = tuple(classify_endpoint(problem, e, lam0, method=method) for e in "ab")
    pairs, seeds = {}, {}
    for cls in classes:
        e = cls.end
        if cls.quasi_regular:
            pairs[e] = principal_pair(problem, e, lam0)
        elif not problem.infinite(e):
            try:
                seeds[e] = principal_pair(problem, e, lam0)
            except (NumericalFailure, MathematicalRefusal):
                seeds[e] = None
    return BoundaryFrame(problem, lam0, pairs.get("a"), pairs.get("b"), classes, seeds)


# ---------------------------------------------------------------- extrapolation

@dataclass(frozen=True)
class LimitEstimate:
    value: float
    spread: float
    estimates: tuple[float, ...]
    sequence: tuple[float, ...]

    def as_dict(self):
        return {"value": self.value, "spread": self.spread}


def wynn_epsilon(seq) -> list[float]:
    """Even-column Wynn estimates using the longest available diagonal for each prefix."""
    S = [float(v) for v in seq]
    out = []
    for n in range(1, len(S) + 1):
        prev = [0.0] * (n + 1)
        cur = S[:n]
        best = cur[-1]
        k = 0
        while len(cur) > 1:
            nxt = []
            for i in range(len(cur) - 1):
                d = cur[i + 1] - cur[i]
                if d == 0 or not math.isfinite(d):
                    nxt.append(math.inf)
                else:
                    nxt.append(prev[i + 1] + 1.0 / d)
            prev, cur = cur, nxt
            k += 1
            if k % 2 == 0 and cur and math.isfinite(cur[-1]):
                best = cur[-1]
            if not all(math.isfinite(c) for c in cur):
                break
        out.append(best)
    return out


def _plateau(est):
    """(spread, value) of the three consecutive estimates that agree best."""
    best = (math.inf, est[-1] if est else math.nan)
    for n in range(min(3, len(est)), len(est) + 1):
        win = est[max(0, n - 3):n]
        if not all(math.isfinite(v) for v in win):
            continue
        sp = max(win) - min(win)
        if sp < best[0]:
            best = (sp, win[-1])
    return best


def limit_of(seq, what: str = "limit") -> LimitEstimate:
    """Extrapolated limit; raises :class:`NotInMaximalDomain` unless three consecutive estimates agree.

    Deep terms carry cancellation noise and shallow ones are not converged,
    so the Wynn table is read at its plateau.  A raw tail that is already
    flatter than that plateau (constant Wronskians of exact solutions) is
    used as is, since acceleration only amplifies its noise.
    """
    seq = [float(v) for v in seq]
    raw = seq[-3:]
    est = wynn_epsilon(seq)
    spread, value = _plateau(est[2:] if len(est) > 4 else est)
    if all(math.isfinite(v) for v in raw) and max(raw) - min(raw) <= spread:
        spread, value = max(raw) - min(raw), raw[-1]
    tol = max(1e-8, 1e-6 * abs(value))
    if not (math.isfinite(value) and spread <= tol):
        raise NotInMaximalDomain(f"{what}: Wronskian sequence does not settle (spread {spread:.3e}, last {value:.6g})")
    return LimitEstimate(value, spread, tuple(est), tuple(seq))


# ---------------------------------------------------------------- boundary values

@dataclass(frozen=True)
class BoundaryData:
    """(g~(a), g~'(a), g~(b), g~'(b)); entries are None at limit-point ends."""

    ga: float | None
    gpa: float | None
    gb: float | None
    gpb: float | None
    diagnostics: dict = field(default_factory=dict)

    def at(self, end: str) -> tuple[float | None, float | None]:
        return (self.ga, self.gpa) if end == "a" else (self.gb, self.gpb)


class FunctionOf:
    """Adapter: a callable x -> (g, g^[1]) seen through endpoint distances."""

    def __init__(self, problem: SLProblem, fn: Callable):
        self.problem, self.fn = problem, fn

    def eval(self, da, db):
        x = self.problem.x_at(da, db)
        g, gq = self.fn(x)
        return np.asarray(g, dtype=float), np.asarray(gq, dtype=float)


def from_expression(problem: SLProblem, text: str) -> FunctionOf:
    """Test function g given as an expression; g^[1] = p g' by forward differentiation."""
    ex = Expression(text)

    def fn(x):
        da, db = problem.distances(x)
        p = problem.coefficients(da, db)[0]
        return ex(x), p * ex.derivative(x)

    return FunctionOf(problem, fn)


def _as_evaluable(problem, g):
    if hasattr(g, "eval"):
        return g
    if isinstance(g, str):
        return from_expression(problem, g)
    if callable(g):
        return FunctionOf(problem, g)
    raise TypeError("g must be a solution object, an expression string or a callable x -> (g, g^[1])")


def wronskian_sequence(problem: SLProblem, f, g, end: str, s=None):
    L = problem.length
    s = approach_distances(problem) if s is None else np.asarray(s)
    da, db = (s, L - s) if end == "a" else (L - s, s)
    fu, fq = f.eval(da, db)
    gu, gq = g.eval(da, db)
    return fu * gq - fq * gu


def _exact(f, g):
    """W(f, g) by basis algebra when both are closed-form solutions of one family."""
    if isinstance(f, BasisSolution) and f.shares_basis(g):
        w = f.wronskian_with(g)
        return LimitEstimate(w, 0.0, (w,), ())
    return None


def boundary_values(problem: SLProblem, frame: BoundaryFrame, g, depth: int = APPROACH_DEPTH,
                    eps: float = 1e-2) -> BoundaryData:
    """Generalized boundary values of g at both ends.

    The approach sequence is e + eps L 2^-k, k = 0..depth.  Solutions of
    tau u = lam0 u have exactly constant Wronskians with the frame; for them
    an interior sequence (eps ~ 1/2) avoids the cancellation that deep
    points cause when the principal part is tiny.
    """
    g = _as_evaluable(problem, g)
    s = approach_distances(problem, k_max=depth, eps=eps)
    vals, diag = {}, {}
    for end in "ab":
        pair = frame.pair(end)
        if pair is None:
            vals[end] = (None, None)
            continue
        lu = _exact(pair.principal, g) or limit_of(wronskian_sequence(problem, pair.principal, g, end, s),
                                                   f"g~({end})")
        lh = _exact(pair.nonprincipal, g) or limit_of(wronskian_sequence(problem, pair.nonprincipal, g, end, s),
                                                      f"g~'({end})")
        vals[end] = (-lu.value, lh.value)
        diag[end] = {"g": lu.as_dict(), "gp": lh.as_dict()}
    return BoundaryData(vals["a"][0], vals["a"][1], vals["b"][0], vals["b"][1], diag)
