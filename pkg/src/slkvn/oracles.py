"""Closed-form ground truth for the built-in families.

Krein matrices, classification tables and Jacobi eigenvalues in closed
form.  These are independent of the shooting/limit pipeline and serve
as its reference in verify mode and in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LimitPointError, NotStrictlyPositive, ParameterError
from .families import bessel_classes, blackhole_classes, jacobi_classes
from .special import EULER_GAMMA, digamma_fn, gamma_fn, rgamma

__all__ = ["OracleReport", "compare", "gamma_fn", "digamma_fn", "EULER_GAMMA", "bessel_rk_closed",
           "blackhole_rk_closed", "jacobi_rk_closed", "jacobi_case", "jacobi_eigen_closed",
           "classification_closed"]


@dataclass(frozen=True)
class OracleReport:
    """Closed-form vs numerical value.  ``rel_dev`` divides by max(|closed|, 1) entrywise."""

    quantity: str
    closed: tuple
    numeric: tuple
    abs_dev: float
    rel_dev: float
    tol: float
    passed: bool

    def as_dict(self):
        return {"quantity": self.quantity, "closed": list(self.closed), "numeric": list(self.numeric),
                "abs_dev": self.abs_dev, "rel_dev": self.rel_dev, "tol": self.tol, "passed": self.passed}


def compare(quantity: str, closed, numeric, tol: float) -> OracleReport:
    c = np.asarray(closed, dtype=float).ravel()
    n = np.asarray(numeric, dtype=float).ravel()
    if c.shape != n.shape:
        raise ValueError(f"{quantity}: shape mismatch {c.shape} vs {n.shape}")
    diff = np.abs(c - n)
    abs_dev = float(np.max(diff)) if diff.size else 0.0
    rel_dev = float(np.max(diff / np.maximum(np.abs(c), 1.0))) if diff.size else 0.0
    return OracleReport(quantity, tuple(map(float, c)), tuple(map(float, n)), abs_dev, rel_dev, tol,
                        bool(rel_dev <= tol))


# ---------------------------------------------------------------- Krein matrices

def bessel_rk_closed(alpha: float, beta: float, gamma: float, b: float = 1.0) -> np.ndarray:
    if not (alpha > -1 and beta < 1 and gamma >= 0 and b > 0):
        raise ParameterError("Bessel parameters out of range")
    if gamma >= 1:
        raise LimitPointError("x = 0 is limit point for gamma >= 1: no 2x2 Krein matrix")
    m = 1 - beta
    if gamma == 0:
        lb = math.log(1 / b)
        return np.array([[m * lb * b ** (m / 2), b ** (m / 2) / m],
                         [(m * m * lb - 2 * m) / 2 * b ** (-m / 2), 0.5 * b ** (-m / 2)]])
    k = (2 + alpha - beta) * gamma
    pre = b ** ((beta - 1 - k) / 2)
    return pre * np.array([[m / k * b ** m, b ** (m + k) / m],
                           [m * m / (2 * k) - m / 2, (0.5 + k / (2 * m)) * b ** k]])


def blackhole_rk_closed() -> np.ndarray:
    """The same matrix for every admissible (p0, r0, alpha, beta, b) with a limit-circle left end."""
    return np.array([[0.0, 1.0], [-1.0, 0.0]])


def jacobi_case(alpha: float, beta: float) -> str | None:
    neg = lambda v: -1 < v < 0
    pos = lambda v: 0 < v < 1
    if neg(alpha) and neg(beta):
        return "I"
    if neg(alpha) and pos(beta):
        return "II"
    if pos(alpha) and neg(beta):
        return "III"
    if alpha == 0 and neg(beta):
        return "IV"
    if neg(alpha) and beta == 0:
        return "V"
    return None


def _beta_ratio(alpha, beta):
    """2^(-a-b-1) Gamma(-a) Gamma(-b) / Gamma(-a-b), with 1/Gamma(pole) = 0."""
    return 2.0 ** (-alpha - beta - 1) * gamma_fn(-alpha) * gamma_fn(-beta) * rgamma(-alpha - beta)


def jacobi_rk_closed(alpha: float, beta: float) -> np.ndarray:
    case = jacobi_case(alpha, beta)
    if case is None:
        raise NotStrictlyPositive(
            f"Jacobi (alpha, beta) = ({alpha:g}, {beta:g}) is outside the strictly positive regions; "
            "the Jacobi polynomials give a zero eigenvalue of the Friedrichs extension")
    if case == "I":
        return np.array([[1.0, _beta_ratio(alpha, beta)], [0.0, 1.0]])
    if case == "II":
        return np.array([[-_beta_ratio(alpha, beta), 1.0], [-1.0, 0.0]])
    if case == "III":
        return np.array([[0.0, -1.0], [1.0, _beta_ratio(alpha, beta)]])
    if case == "IV":
        return np.array([[0.0, -1.0], [1.0, -2.0 ** (-beta - 1) * (EULER_GAMMA + digamma_fn(-beta))]])
    return np.array([[2.0 ** (-alpha - 1) * (EULER_GAMMA + digamma_fn(-alpha)), 1.0], [-1.0, 0.0]])


# ---------------------------------------------------------------- tables

def jacobi_eigen_closed(alpha: float, beta: float, n: int) -> float:
    if n < 0 or int(n) != n:
        raise ParameterError("n must be a nonnegative integer")
    return float(n * (n + 1 + alpha + beta))


def classification_closed(family: str, params: dict) -> dict:
    """{'a': class, 'b': class} from the closed-form tables."""
    if family == "jacobi":
        ca, cb = jacobi_classes(params["alpha"], params["beta"])
    elif family == "bessel":
        ca, cb = bessel_classes(params["alpha"], params["beta"], params["gamma"])
    elif family == "blackhole":
        ca, cb = blackhole_classes(params["alpha"], params["beta"])
    else:
        raise ParameterError(f"no closed-form classification for family {family!r}")
    return {"a": ca, "b": cb}
