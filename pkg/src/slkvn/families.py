"""Closed-form solutions of tau u = 0 for the built-in families.

Every family has an explicit null basis (y1, y2) with constant Wronskian
``w12``.  Frame solutions are linear combinations of that basis, so their
mutual Wronskians are exact algebra and never need a limit.

Nonprincipal normalizations follow the conventions that make the Krein
matrices come out in their standard closed forms: for instance at a
singular Jacobi endpoint the nonprincipal solution is pinned by its
leading singular term with a vanishing remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import quad

from .coeffs import SLProblem
from .errors import ParameterError

REGULAR, LIMIT_CIRCLE, LIMIT_POINT = "Regular", "LimitCircle", "LimitPoint"
SERIES_TERMS = 90  # terms ~ 2^-n n^e: 90 reaches double precision at s = 1
_EXPONENTS = np.arange(SERIES_TERMS, dtype=float)


@dataclass(frozen=True, eq=False)
class BasisSolution:
    """c1*y1 + c2*y2 for a family null basis."""

    basis: "NullBasis"
    c1: float
    c2: float
    lam: float = 0.0

    def eval(self, da, db):
        y1, y1q, y2, y2q = self.basis.eval(da, db)
        return self.c1 * y1 + self.c2 * y2, self.c1 * y1q + self.c2 * y2q

    def wronskian_with(self, other: "BasisSolution") -> float:
        return (self.c1 * other.c2 - self.c2 * other.c1) * self.basis.w12

    def shares_basis(self, other) -> bool:
        return (isinstance(other, BasisSolution) and self.lam == other.lam
                and type(self.basis) is type(other.basis) and self.basis.key == other.basis.key)

    def shifted(self, other: "BasisSolution", c: float) -> "BasisSolution":
        return BasisSolution(self.basis, self.c1 + c * other.c1, self.c2 + c * other.c2)


class NullBasis:
    w12: float
    key: tuple = ()

    def eval(self, da, db):
        raise NotImplementedError

    def solution(self, c1, c2) -> BasisSolution:
        return BasisSolution(self, float(c1), float(c2))

    def canonical(self, end: str, values) -> tuple[BasisSolution, BasisSolution]:
        """(u, u_hat) with (u, u^[1]) = (0, 1) and (u_hat, u_hat^[1]) = (1, 0) at a regular end."""
        y1, y1q, y2, y2q = values
        Y = np.array([[y1, y2], [y1q, y2q]], dtype=float)
        cu = np.linalg.solve(Y, [0.0, 1.0])
        ch = np.linalg.solve(Y, [1.0, 0.0])
        return self.solution(*cu), self.solution(*ch)


# ------------------------------------------------------------------ Bessel

def _sinhc(z):
    """sinh(z) / z, accurate down to z = 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1.0, z)
    return np.where(small, 1 + z * z / 6, np.sinh(safe) / safe)


class BesselBasis(NullBasis):
    """y1 = x^m+ and y2 = (x^m- - x^m+) / k, which tends to -x^m0 log x as k -> 0.

    Dividing by k keeps the pair independent (W = -1) for every k >= 0, so
    tiny gamma does not collapse the basis.
    """

    w12 = -1.0

    def __init__(self, alpha, beta, gamma, b):
        self.beta = beta
        self.k = (2 + alpha - beta) * gamma
        self.m0 = (1 - beta) / 2
        self.mp = self.m0 + self.k / 2
        self.b = b
        self.key = (alpha, beta, gamma, b)

    def eval(self, da, db):
        be, m0, h = self.beta, self.m0, self.k / 2
        if type(da) is float:
            t = math.log(da)
            z = h * t
            shc = 1 + z * z / 6 if abs(z) < 1e-4 else math.sinh(z) / z
            xm = math.exp(m0 * t)
            y1 = math.exp(self.mp * t)
            y2 = -xm * t * shc
            xb = math.exp((be - 1) * t)
            return y1, self.mp * y1 * xb, y2, xb * (m0 * y2 - xm * math.cosh(z))
        x = np.asarray(da, dtype=float)
        t = np.log(x)
        xm = x ** m0
        y1 = x ** self.mp
        y2 = -xm * t * _sinhc(h * t)
        y2q = x ** (be - 1) * (m0 * y2 - xm * np.cosh(h * t))
        return y1, self.mp * x ** (self.mp + be - 1), y2, y2q

    def frames(self):
        be = self.beta
        u_a = self.solution(1 / (1 - be), 0.0)
        # x^m- = y1 + k y2, scaled by (1 - beta) / k; the log solution when k = 0
        c1 = (1 - be) / self.k if self.k > 0 else 0.0
        if not math.isfinite(c1):
            raise ParameterError(f"gamma = {self.key[2]!r} is too small: the nonprincipal normalization "
                                 f"(1 - beta) / k overflows")
        uh_a = self.solution(c1, 1 - be)
        u_b, uh_b = self.canonical("b", self.eval(self.b, 0.0))
        return (u_a, uh_a), (u_b, uh_b)


def bessel_classes(alpha, beta, gamma):
    return (LIMIT_CIRCLE if gamma < 1 else LIMIT_POINT), REGULAR


# ---------------------------------------------------------------- BlackHole

class BlackHoleBasis(NullBasis):
    """y1 = 1 and y2 = -int_x^b dt / p(t), so y2^[1] = 1."""

    w12 = 1.0

    def __init__(self, alpha, b, p0=None):
        self.alpha, self.b, self.p0 = alpha, b, p0
        self.key = (alpha, b, p0)

    def _J(self, x, db):
        al, b = self.alpha, self.b
        if self.p0 is None:
            lr = math.log1p(-db / b) if db < 0.5 * b else math.log(x / b)
            if al == 1:
                return lr
            return b ** (1 - al) * math.expm1((1 - al) * lr) / (1 - al)
        p0 = self.p0
        f = lambda s: math.exp((1 - al) * s) / float(p0(math.exp(s)))
        val, _ = quad(f, math.log(x), math.log(b), limit=200, epsabs=0, epsrel=1e-13)
        return -val

    def eval(self, da, db):
        da = np.asarray(da, dtype=float)
        db = np.broadcast_to(np.asarray(db, dtype=float), da.shape)
        J = np.vectorize(self._J, otypes=[float])(da, db)
        one = np.ones_like(J)
        return one, 0 * one, J, one

    def J_at_zero(self):
        al, b = self.alpha, self.b
        if self.p0 is None:
            return -b ** (1 - al) / (1 - al)
        val, _ = quad(lambda t: t ** (-al) / float(self.p0(t)), 0, b, limit=200)
        return -val

    def frames(self):
        if self.alpha >= 1:
            a_pair = (self.solution(1.0, 0.0), self.solution(0.0, -1.0))
        else:
            a_pair = (self.solution(-self.J_at_zero(), 1.0), self.solution(1.0, 0.0))
        return a_pair, (self.solution(0.0, 1.0), self.solution(1.0, 0.0))


def blackhole_classes(alpha, beta):
    if alpha < 1 and beta > -1:
        left = REGULAR
    elif beta > max(-1.0, 2 * alpha - 3):
        left = LIMIT_CIRCLE
    else:
        left = LIMIT_POINT
    return left, REGULAR


# ------------------------------------------------------------------- Jacobi

def _tail_integrand(e_near, e_far):
    """g(s) with 1/p = s^(-1-e_near) * (2-s)^(-1-e_far) = s^(-e_near) g(s) + 2^(-1-e_far) s^(-1-e_near)."""
    c = 2.0 ** (-1 - e_far)

    def g(s):
        if s == 0.0:
            return c * (1 + e_far) / 2
        return c * math.expm1((-1 - e_far) * math.log1p(-s / 2)) / s

    return g


class JacobiBasis(NullBasis):
    """y1 = 1, y2 = I(x) = int_0^x dt / p(t).

    Near each end I is split into an explicit power (or log) term and a
    regular remainder integral, evaluated with an algebraic-weight rule.
    """

    w12 = 1.0

    def __init__(self, alpha, beta):
        self.alpha, self.beta = alpha, beta
        self.key = (alpha, beta)
        self._last = None
        self._ga = _tail_integrand(beta, alpha)   # side x = -1 + s
        self._gb = _tail_integrand(alpha, beta)   # side x = 1 - s

    @staticmethod
    @lru_cache(maxsize=64)
    def _series_coef(e, e_far):
        n = np.arange(1, SERIES_TERMS + 1)
        coef = np.cumprod((e_far + n) / n) * 2.0 ** (-n) * 2.0 ** (-1 - e_far) / (n - e)
        return coef

    def _series(self, e, e_far, d):
        """int_0^d s^(-e) g(s) ds for e < 1 from the binomial series of (1 - s/2)^(-1-e_far)."""
        if d == 0:
            return 0.0
        with np.errstate(under="ignore"):
            powers = d ** _EXPONENTS
        return float(np.dot(self._series_coef(e, e_far), powers)) * d ** (1 - e)

    def _remainder(self, g, e, d):
        """int_d^1 s^(-e) g(s) ds."""
        if e < 1 and 0 <= d <= 1:
            e_far = self.alpha if g is self._ga else self.beta
            return self._series(e, e_far, 1.0) - self._series(e, e_far, d)
        return self._remainder_quad(g, e, d)

    @staticmethod
    def _remainder_quad(g, e, d):
        if e < 1:
            tot = quad(g, 0.0, 1.0, weight="alg", wvar=(-e, 0.0), epsabs=0, epsrel=1e-13)[0]
            if d <= 0:
                return tot
            if d >= 1:
                return -quad(lambda s: s ** (-e) * g(s), 1.0, d, epsabs=0, epsrel=1e-13)[0]
            return tot - quad(g, 0.0, d, weight="alg", wvar=(-e, 0.0), epsabs=0, epsrel=1e-13)[0]
        f = lambda t: math.exp((1 - e) * t) * g(math.exp(t))
        return quad(f, math.log(d), 0.0, limit=200, epsabs=0, epsrel=1e-13)[0]

    @staticmethod
    def _power(e, d):
        """int_d^1 s^(-1-e) ds."""
        if e == 0:
            return -math.log(d)
        if d == 0:
            return -1.0 / e  # only reached for e < 0
        return math.expm1(-e * math.log(d)) / e

    @cached_property
    def A0(self):
        return self._remainder(self._ga, self.beta, 0.0)

    @cached_property
    def B0(self):
        return self._remainder(self._gb, self.alpha, 0.0)

    def _I(self, da, db):
        al, be = self.alpha, self.beta
        if da <= db:
            return -(self._remainder(self._ga, be, da) + 2.0 ** (-1 - al) * self._power(be, da))
        return self._remainder(self._gb, al, db) + 2.0 ** (-1 - be) * self._power(al, db)

    def eval(self, da, db):
        if type(da) is float and type(db) is float:
            # scalar hot path; u and u_hat of a frame ask for the same point in turn
            if self._last is not None and self._last[0] == (da, db):
                return self._last[1]
            out = (1.0, 0.0, self._I(da, db), 1.0)
            self._last = ((da, db), out)
            return out
        da = np.asarray(da, dtype=float)
        db = np.broadcast_to(np.asarray(db, dtype=float), da.shape)
        I = np.vectorize(self._I, otypes=[float])(da, db)
        one = np.ones_like(I)
        return one, 0 * one, I, one

    def I_left(self):
        return -self.A0 + 2.0 ** (-1 - self.alpha) / self.beta

    def I_right(self):
        return self.B0 - 2.0 ** (-1 - self.beta) / self.alpha

    def frames(self):
        al, be = self.alpha, self.beta
        one = self.solution(1.0, 0.0)
        if be < 0:
            a_pair = (self.solution(-self.I_left(), 1.0), one)
        else:
            if be == 0:
                K = 2.0 ** (-1 - al) * math.log(2) - self.A0
            elif be < 1:
                K = 2.0 ** (-1 - al) / be - self.A0
            else:
                K = 0.0
            a_pair = (one, self.solution(K, -1.0))
        if al < 0:
            b_pair = (self.solution(-self.I_right(), 1.0), one)
        else:
            if al == 0:
                K = self.B0 - 2.0 ** (-1 - be) * math.log(2)
            elif al < 1:
                K = self.B0 - 2.0 ** (-1 - be) / al
            else:
                K = 0.0
            b_pair = (one, self.solution(K, -1.0))
        for u, uh in (a_pair, b_pair):
            if not all(math.isfinite(c) for c in (u.c1, u.c2, uh.c1, uh.c2)):
                raise ParameterError(f"Jacobi exponents ({al!r}, {be!r}) are too close to 0 from below: "
                                     f"the frame normalization overflows")
        return a_pair, b_pair


def jacobi_class(e):
    """Class of the endpoint whose local exponent is ``e`` (beta at -1, alpha at +1)."""
    if -1 < e < 0:
        return REGULAR
    if 0 <= e < 1:
        return LIMIT_CIRCLE
    return LIMIT_POINT


def jacobi_classes(alpha, beta):
    return jacobi_class(beta), jacobi_class(alpha)


# ---------------------------------------------------------------- dispatch

def null_basis(problem: SLProblem) -> NullBasis | None:
    P = problem.params
    if problem.family == "bessel":
        return BesselBasis(P["alpha"], P["beta"], P["gamma"], P["b"])
    if problem.family == "blackhole":
        return BlackHoleBasis(P["alpha"], P["b"], P["p0"])
    if problem.family == "jacobi":
        return JacobiBasis(P["alpha"], P["beta"])
    return None


def closed_classes(problem: SLProblem) -> tuple[str, str] | None:
    P = problem.params
    if problem.family == "bessel":
        return bessel_classes(P["alpha"], P["beta"], P["gamma"])
    if problem.family == "blackhole":
        return blackhole_classes(P["alpha"], P["beta"])
    if problem.family == "jacobi":
        return jacobi_classes(P["alpha"], P["beta"])
    return None
