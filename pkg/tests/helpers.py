"""Small shared builders for the test modules."""

import math

import numpy as np

from slkvn import make_problem


def constant(a=0.0, b=1.0, **kw):
    return make_problem({"family": "generic", "a": a, "b": b, **kw})


def jacobi(alpha, beta):
    return make_problem({"family": "jacobi", "alpha": alpha, "beta": beta})


def bessel(alpha, beta, gamma, b=1.0):
    return make_problem({"family": "bessel", "alpha": alpha, "beta": beta, "gamma": gamma, "b": b})


def blackhole(alpha, beta, b=1.0, **kw):
    return make_problem({"family": "blackhole", "alpha": alpha, "beta": beta, "b": b, **kw})


def krein_constant_root(n=1):
    """n-th positive root k of tan(k/2) = k/2 via plain bisection (independent of the package)."""
    f = lambda k: math.sin(k / 2) - (k / 2) * math.cos(k / 2)
    lo, hi = 2 * math.pi * n + 1e-9, 2 * math.pi * n + math.pi - 1e-9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0)))
