"""Gamma and digamma, self-contained so oracle values do not depend on libm."""

import math

from .errors import PoleError

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficient set).
_G = 7.0
_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

EULER_GAMMA = 0.57721566490153286061


def _sinpi(x: float) -> float:
    """sin(pi*x) with exact zeros at the integers."""
    n = round(2.0 * x)
    r = x - 0.5 * n
    s = math.sin(math.pi * r) if n % 2 == 0 else math.cos(math.pi * r)
    return -s if (n // 2) % 2 else s


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _gamma_positive(x: float) -> float:
    # Recurse large arguments down to the range where the series is tuned.
    if x > 30.0:
        return (x - 1.0) * _gamma_positive(x - 1.0)
    z = x - 1.0
    acc = _COEF[0]
    for k in range(1, len(_COEF)):
        acc += _COEF[k] / (z + k)
    t = z + _G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def gamma_fn(x: float) -> float:
    """Gamma function on the reals; raises :class:`PoleError` at 0, -1, -2, ..."""
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    if x < 0.5:
        return math.pi / (_sinpi(x) * _gamma_positive(1.0 - x))
    return _gamma_positive(x)


def rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    if _is_pole(float(x)):
        return 0.0
    return 1.0 / gamma_fn(x)


def digamma_fn(x: float) -> float:
    """psi(x) = Gamma'(x)/Gamma(x)."""
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"digamma has a pole at {x:g}")
    if x < 0.5:
        # psi(1-x) - psi(x) = pi cot(pi x)
        cot = _sinpi(x + 0.5) / _sinpi(x)
        return digamma_fn(1.0 - x) - math.pi * cot
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    # Bernoulli tail: 1/12, 1/120, 1/252, 1/240, 1/132, 691/32760, 1/12
    tail = inv2 * (1 / 12 - inv2 * (1 / 120 - inv2 * (1 / 252 - inv2 * (
        1 / 240 - inv2 * (1 / 132 - inv2 * (691 / 32760 - inv2 / 12))))))
    return acc + math.log(x) - 0.5 / x - tail
