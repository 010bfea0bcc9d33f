"""Sturm-Liouville problems  tau u = (-(p u')' + q u) / r  on (a, b).

Coefficients are evaluated through *endpoint distances*: ``da`` is the
distance to the left numerical endpoint and ``db`` the distance to the
right one.  Built-in families use those distances directly, so powers
like ``(1 - x)**alpha`` keep full relative accuracy near x = 1.  Generic
callables receive the abscissa ``x``.

Infinite endpoints are replaced by a finite cutoff for numerical work;
``da``/``db`` are then measured from the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, ParameterError
from .expr import Expression

DEFAULT_CUTOFF = 40.0
N_PROBES = 1000

Coefficient = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------- descriptors

@dataclass(frozen=True)
class Bessel:
    """p = x^beta, r = x^alpha, q = c x^(beta-2) on (0, b)."""

    alpha: float
    beta: float
    gamma: float
    b: float = 1.0
    family: str = field(default="bessel", init=False)


@dataclass(frozen=True)
class BlackHole:
    """p = p0(x) x^alpha, r = r0(x) x^beta, q = 0 on (0, b).

    ``p0``/``r0`` default to the constant 1 and must stay within [m, M].
    """

    alpha: float
    beta: float
    b: float = 1.0
    p0: Coefficient | str | None = None
    r0: Coefficient | str | None = None
    m: float = 1.0
    M: float = 1.0
    family: str = field(default="blackhole", init=False)


@dataclass(frozen=True)
class Jacobi:
    """p = (1-x)^(alpha+1) (1+x)^(beta+1), r = (1-x)^alpha (1+x)^beta, q = 0."""

    alpha: float
    beta: float
    family: str = field(default="jacobi", init=False)


@dataclass(frozen=True)
class Generic:
    """User coefficients: callables of x or expression strings."""

    a: float
    b: float
    p: Coefficient | str = "1"
    q: Coefficient | str = "0"
    r: Coefficient | str = "1"
    cutoff: float | None = None
    family: str = field(default="generic", init=False)


Descriptor = Bessel | BlackHole | Jacobi | Generic

_FAMILIES = {"bessel": Bessel, "blackhole": BlackHole, "jacobi": Jacobi, "generic": Generic}


def _as_float(v):
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity", "+infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
    return float(v)


def descriptor_from_mapping(data: Mapping) -> Descriptor:
    """Build a descriptor from a plain mapping such as a parsed config."""
    data = dict(data)
    family = data.pop("family", "generic")
    if family not in _FAMILIES:
        raise ParameterError(f"family: unknown family {family!r}")
    cls = _FAMILIES[family]
    names = {f.name for f in cls.__dataclass_fields__.values() if f.init}
    extra = set(data) - names
    if extra:
        raise ParameterError(f"problem.{sorted(extra)[0]}: unknown key for family {family}")
    for key in ("alpha", "beta", "gamma", "m", "M", "cutoff"):
        if key in data and data[key] is not None:
            data[key] = float(data[key])
    for key in ("a", "b"):
        if key in data:
            data[key] = _as_float(data[key])
    return cls(**data)


def descriptor_to_mapping(desc: Descriptor) -> dict:
    out = {"family": desc.family}
    for name, f in desc.__dataclass_fields__.items():
        if not f.init:
            continue
        v = getattr(desc, name)
        if v is None:
            continue
        if isinstance(v, Expression):
            v = v.text
        elif callable(v):
            v = getattr(v, "__name__", "<callable>")
        elif isinstance(v, float) and math.isinf(v):
            v = "inf" if v > 0 else "-inf"
        out[name] = v
    return out


# ---------------------------------------------------------------- problem

@dataclass(frozen=True, eq=False)
class SLProblem:
    """Immutable problem; see the module docstring for the coordinate scheme."""

    a: float
    b: float
    lo: float
    hi: float
    family: str
    params: Mapping
    local: Callable = field(repr=False)
    descriptor: Descriptor = field(repr=False)
    raw: tuple = field(repr=False, default=())

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def infinite(self, end: str) -> bool:
        return math.isinf(self.a if end == "a" else self.b)

    def coefficients(self, da, db):
        """(p, q, r) at the point with endpoint distances (da, db)."""
        return self.local(da, db)

    def x_at(self, da, db):
        return np.where(np.asarray(da) <= np.asarray(db), self.lo + np.asarray(da), self.hi - np.asarray(db))

    def distances(self, x):
        x = np.asarray(x, dtype=float)
        return x - self.lo, self.hi - x

    def with_cutoff(self, cutoff: float) -> "SLProblem":
        if self.family != "generic":
            raise ParameterError("cutoff only applies to problems with an infinite endpoint")
        return make_problem(replace(self.descriptor, cutoff=float(cutoff)))

    @property
    def cutoff(self) -> float | None:
        return self.params.get("cutoff")


def _compile(c):
    return Expression(c) if isinstance(c, str) else c


def _call(f, x):
    if type(x) is float:
        if isinstance(f, Expression):
            return f.scalar(x)
        return float(f(x))
    try:
        out = f(x)
    except TypeError:
        out = np.vectorize(f, otypes=[float])(x)
    return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)) * 1.0


def _bessel(d: Bessel) -> SLProblem:
    if not (d.alpha > -1):
        raise ParameterError("alpha > -1 violated")
    if not (d.beta < 1):
        raise ParameterError("beta < 1 violated")
    if not (d.gamma >= 0):
        raise ParameterError("gamma >= 0 violated")
    if not (d.b > 0 and math.isfinite(d.b)):
        raise ParameterError("b > 0 violated")
    al, be, ga = d.alpha, d.beta, d.gamma
    c = ((2 + al - be) ** 2 * ga ** 2 - (1 - be) ** 2) / 4.0

    def local(da, db):
        x = np.asarray(da, dtype=float)
        p = x ** be
        r = x ** al
        q = c * x ** (be - 2) if c != 0 else 0.0 * x
        return p, q, r

    params = {"alpha": al, "beta": be, "gamma": ga, "b": d.b, "qcoef": c}
    return SLProblem(0.0, d.b, 0.0, d.b, "bessel", params, local, d)


def _blackhole(d: BlackHole) -> SLProblem:
    if not (d.b > 0 and math.isfinite(d.b)):
        raise ParameterError("b > 0 violated")
    if not (0 < d.m <= d.M):
        raise ParameterError("0 < m <= M violated")
    if not (math.isfinite(d.alpha) and math.isfinite(d.beta)):
        raise ParameterError("alpha, beta must be finite")
    p0, r0 = _compile(d.p0), _compile(d.r0)
    al, be = d.alpha, d.beta

    def local(da, db):
        x = np.asarray(da, dtype=float)
        p = x ** al if p0 is None else _call(p0, x) * x ** al
        r = x ** be if r0 is None else _call(r0, x) * x ** be
        return p, 0.0 * x, r

    params = {"alpha": al, "beta": be, "b": d.b, "m": d.m, "M": d.M,
              "p0": p0, "r0": r0}
    prob = SLProblem(0.0, d.b, 0.0, d.b, "blackhole", params, local, d)
    # bounds m <= p0, r0 <= M on probes
    xs = _probe_points(prob)
    for name, f in (("p0", p0), ("r0", r0)):
        vals = np.ones_like(xs) if f is None else _call(f, xs)
        bad = np.flatnonzero((vals < d.m * (1 - 1e-12)) | (vals > d.M * (1 + 1e-12)) | ~np.isfinite(vals))
        if bad.size:
            raise ParameterError(f"{name} leaves [m, M] at x = {xs[bad[0]]:.6g}")
    return prob


def _jacobi(d: Jacobi) -> SLProblem:
    if not (math.isfinite(d.alpha) and math.isfinite(d.beta)):
        raise ParameterError("alpha, beta must be finite")
    al, be = d.alpha, d.beta

    def local(da, db):
        da = np.asarray(da, dtype=float)
        db = np.asarray(db, dtype=float)
        wa, wb = db ** al, da ** be
        return wa * wb * da * db, 0.0 * da, wa * wb

    return SLProblem(-1.0, 1.0, -1.0, 1.0, "jacobi", {"alpha": al, "beta": be}, local, d)


def _generic(d: Generic) -> SLProblem:
    a, b = float(d.a), float(d.b)
    if not a < b:
        raise ParameterError("a < b violated")
    lo, hi = a, b
    cutoff = d.cutoff
    if math.isinf(a) or math.isinf(b):
        if cutoff is None:
            if math.isinf(a) and math.isinf(b):
                cutoff = DEFAULT_CUTOFF
            else:
                cutoff = (a if math.isfinite(a) else b) + (DEFAULT_CUTOFF if math.isfinite(a) else -DEFAULT_CUTOFF)
        cutoff = float(cutoff)
        if math.isinf(a) and math.isinf(b):
            lo, hi = -abs(cutoff), abs(cutoff)
        elif math.isinf(b):
            if not cutoff > a:
                raise ParameterError("cutoff must lie inside (a, b)")
            hi = cutoff
        else:
            if not cutoff < b:
                raise ParameterError("cutoff must lie inside (a, b)")
            lo = cutoff
    elif cutoff is not None:
        raise ParameterError("cutoff only applies to problems with an infinite endpoint")
    p, q, r = _compile(d.p), _compile(d.q), _compile(d.r)

    def local(da, db):
        if type(da) is float and type(db) is float:
            x = lo + da if da <= db else hi - db
            return _call(p, x), _call(q, x), _call(r, x)
        da = np.asarray(da, dtype=float)
        db = np.asarray(db, dtype=float)
        x = np.where(da <= db, lo + da, hi - db)
        return _call(p, x), _call(q, x), _call(r, x)

    params = {"cutoff": cutoff} if cutoff is not None else {}
    prob = SLProblem(a, b, lo, hi, "generic", params, local, d, raw=(p, q, r))
    _validate_generic(prob)
    return prob


def _probe_points(prob: SLProblem, n: int = N_PROBES) -> np.ndarray:
    """Log-spaced interior abscissae clustering toward both numerical endpoints."""
    L = prob.length
    half = np.geomspace(1e-8, 0.5, n // 2) * L
    return np.sort(np.concatenate([prob.lo + half, prob.hi - half]))


def _validate_generic(prob: SLProblem) -> None:
    xs = _probe_points(prob)
    # keep probes representable as distinct interior points
    xs = xs[(xs > prob.lo) & (xs < prob.hi)]
    p, q, r = (_call(f, xs) for f in prob.raw)
    for name, vals, positive in (("p", p, True), ("r", r, True), ("q", q, False)):
        bad = ~np.isfinite(vals)
        if positive:
            bad |= ~(vals > 0)
        idx = np.flatnonzero(bad)
        if idx.size:
            cond = "> 0" if positive else "finite"
            raise ParameterError(f"{name}(x) {cond} violated at x = {xs[idx[0]]:.6g}")
        # sign change between consecutive probes of p or r means a zero was skipped
    lo, hi = prob.lo + prob.length / 4, prob.hi - prob.length / 4
    f_p, f_q, f_r = prob.raw
    for name, f in (("r", lambda t: _call(f_r, t)), ("1/p", lambda t: 1.0 / _call(f_p, t)),
                    ("q", lambda t: abs(_call(f_q, t)))):
        val, _ = quad(lambda t: float(f(np.float64(t))), lo, hi, limit=100)
        if not math.isfinite(val):
            raise ParameterError(f"{name} not integrable on [{lo:.6g}, {hi:.6g}]")


def probe_report(prob: SLProblem) -> dict:
    """Minimum sampled p and r over the probe set (positivity margins)."""
    xs = _probe_points(prob)
    da, db = prob.distances(xs)
    p, q, r = prob.coefficients(da, db)
    return {"n": int(xs.size), "min_p": float(np.min(p)), "min_r": float(np.min(r)),
            "max_abs_q": float(np.max(np.abs(q)))}


_BUILDERS = {"bessel": _bessel, "blackhole": _blackhole, "jacobi": _jacobi, "generic": _generic}


def make_problem(spec: Descriptor | Mapping) -> SLProblem:
    """Validate a descriptor (dataclass or mapping) and build the problem."""
    if isinstance(spec, Mapping):
        spec = descriptor_from_mapping(spec)
    return _BUILDERS[spec.family](spec)


def eval_coefficients(problem: SLProblem, x: float) -> tuple[float, float, float]:
    """(p(x), q(x), r(x)) at an interior abscissa."""
    x = float(x)
    if not (problem.a < x < problem.b):
        raise DomainError(f"x = {x!r} is not inside ({problem.a}, {problem.b})")
    if problem.family == "generic":
        return tuple(float(_call(f, np.float64(x))) for f in problem.raw)
    p, q, r = problem.coefficients(x - problem.a, problem.b - x)
    return float(p), float(q), float(r)
