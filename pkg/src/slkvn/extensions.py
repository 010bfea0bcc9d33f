"""Self-adjoint extensions: separated, coupled, Friedrichs and Krein.

Boundary conditions are stated on generalized boundary values, so the
same parametrization covers regular and limit-circle endpoints:

* separated: sin(gamma) g~'(a) + cos(gamma) g~(a) = 0 and the same at b
  with delta (an angle is None at a limit-point end);
* coupled: (g~(b), g~'(b)) = e^{i phi} R (g~(a), g~'(a)) with det R = 1.

The Friedrichs extension is gamma = delta = 0 (principal solutions).  The
Krein extension needs a strictly positive minimal operator; its data come
from principal solutions of tau u = 0 at the opposite end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryFrame, boundary_frame, boundary_values
from .classify import deficiency_index, principal_pair
from .errors import (DeficiencyMismatch, LimitPointError, NotStrictlyPositive, NumericalFailure,
                     NumericalQualityError, ParameterError)
from .quasi_ode import approach_distances, integrate_solution
from .spectra import lowest_eigenvalue

DET_TOL = 1e-10
POSITIVITY_EPS = 1e-6
# Wronskians of exact lam0-solutions are constant: read them off at interior points
SOLUTION_APPROACH = {"depth": 4, "eps": 0.5}


@dataclass(frozen=True)
class ExtensionSpec:
    kind: str  # "separated" | "coupled" | "none"
    gamma: float | None = None
    delta: float | None = None
    phi: float | None = None
    R: tuple | None = None
    provenance: str = "user"
    diagnostics: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "provenance": self.provenance}
        if self.kind == "separated":
            out.update(gamma=self.gamma, delta=self.delta)
        elif self.kind == "coupled":
            out.update(phi=self.phi, R=[list(row) for row in self.R])
        return out


def _angle(name, v, upper):
    if v is None:
        return None
    v = float(v)
    if not (0.0 <= v < upper):
        raise ParameterError(f"{name} must lie in [0, {'pi' if upper == math.pi else '2 pi'})")
    return v


def separated(gamma=None, delta=None, provenance="user", diagnostics=None) -> ExtensionSpec:
    return ExtensionSpec("separated", _angle("gamma", gamma, math.pi), _angle("delta", delta, math.pi),
                         provenance=provenance, diagnostics=diagnostics or {})


def coupled(phi, R, provenance="user", diagnostics=None, det_tol=DET_TOL) -> ExtensionSpec:
    R = np.asarray(R, dtype=float)
    if R.shape != (2, 2) or not np.all(np.isfinite(R)):
        raise ParameterError("R must be a finite real 2x2 matrix")
    det = float(np.linalg.det(R))
    if abs(det - 1.0) > det_tol:
        raise ParameterError(f"det R = 1 violated (det R = {det:.15g})")
    return ExtensionSpec("coupled", phi=_angle("phi", phi, 2 * math.pi),
                         R=tuple(tuple(float(v) for v in row) for row in R),
                         provenance=provenance, diagnostics=diagnostics or {})


def no_conditions(provenance="user") -> ExtensionSpec:
    return ExtensionSpec("none", provenance=provenance)


def friedrichs(problem, frame: BoundaryFrame | None = None) -> ExtensionSpec:
    """Dirichlet-type data (principal solutions) at every quasi-regular end."""
    frame = frame or boundary_frame(problem)
    if frame.deficiency == 0:
        return no_conditions("friedrichs")
    ga = 0.0 if frame.cls("a").quasi_regular else None
    gb = 0.0 if frame.cls("b").quasi_regular else None
    return separated(ga, gb, provenance="friedrichs")


# ---------------------------------------------------------------- positivity

@dataclass(frozen=True)
class PositivityReport:
    lam_min: float
    eps: float
    strictly_positive: bool
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {"lam_min": self.lam_min, "eps": self.eps,
                "strictly_positive": self.strictly_positive, **self.details}


def _friedrichs_bottom(problem, frame=None):
    frame = frame or boundary_frame(problem)
    return lowest_eigenvalue(problem, frame, friedrichs(problem, frame))


def strict_positivity_gate(problem, eps_tol: float = POSITIVITY_EPS,
                           frame: BoundaryFrame | None = None) -> PositivityReport:
    """Bottom of the Friedrichs spectrum, compared with ``eps_tol``.

    With an infinite endpoint the bottom is computed at cutoffs X and 2X and
    extrapolated assuming an O(X^-2) approach to the limit.
    """
    if problem.infinite("a") or problem.infinite("b"):
        X = problem.cutoff
        l1 = _friedrichs_bottom(problem)
        l2 = _friedrichs_bottom(problem.with_cutoff(2 * X))
        lam = (4 * l2 - l1) / 3
        details = {"cutoff": X, "lam_cutoff": l1, "lam_double_cutoff": l2, "extrapolated": True}
    else:
        lam = _friedrichs_bottom(problem, frame)
        details = {"extrapolated": False}
    return PositivityReport(float(lam), eps_tol, bool(lam >= eps_tol), details)


# ---------------------------------------------------------------- Krein data

def _far(end):
    return "b" if end == "a" else "a"


def rk_from_principal(problem, side: str = "a", frame: BoundaryFrame | None = None) -> np.ndarray:
    """Krein coupling matrix from principal/nonprincipal solutions at one end.

    side a: R = [[-W(u_b, u^_a), -W(u_b, u_a)], [W(u^_b, u^_a), W(u^_b, u_a)]]
    expressed through generalized boundary values at b; side b uses the
    inverse form built from boundary values at a of the b-pair.
    """
    frame = frame or boundary_frame(problem)
    if frame.deficiency != 2:
        raise LimitPointError("the Krein coupling matrix needs both endpoints quasi-regular")
    if side == "a":
        pa = frame.pair("a")
        bu = boundary_values(problem, frame, pa.principal, **SOLUTION_APPROACH)
        bh = boundary_values(problem, frame, pa.nonprincipal, **SOLUTION_APPROACH)
        # columns are the b-data of u^_a and u_a
        return np.array([[bh.gb, bu.gb], [bh.gpb, bu.gpb]])
    if side == "b":
        pb = frame.pair("b")
        bu = boundary_values(problem, frame, pb.principal, **SOLUTION_APPROACH)
        bh = boundary_values(problem, frame, pb.nonprincipal, **SOLUTION_APPROACH)
        return np.array([[bu.gpa, -bu.ga], [-bh.gpa, bh.ga]])
    raise ValueError("side must be 'a' or 'b'")


def null_solutions(problem, lam: float = 0.0):
    """Two solutions of tau u = lam u seeded at the midpoint, reaching close to both ends."""
    L = problem.length
    far = float(approach_distances(problem, k_max=SOLUTION_APPROACH["depth"],
                                   eps=SOLUTION_APPROACH["eps"])[-1]) / 4
    reach = {"a": far, "b": far}
    mid = (L / 2, L / 2)
    return (integrate_solution(problem, lam, mid, [1.0, 0.0], reach=reach, rtol=1e-12),
            integrate_solution(problem, lam, mid, [0.0, 1.0], reach=reach, rtol=1e-12))


def rk_from_null_basis(problem, frame: BoundaryFrame | None = None) -> np.ndarray:
    """Krein matrix from the kernel basis normalized by u1~(a) = 0, u1~(b) = 1, u2~(a) = 1, u2~(b) = 0."""
    frame = frame or boundary_frame(problem)
    if frame.deficiency != 2:
        raise LimitPointError("the Krein coupling matrix needs both endpoints quasi-regular")
    w1, w2 = null_solutions(problem)
    b1 = boundary_values(problem, frame, w1, **SOLUTION_APPROACH)
    b2 = boundary_values(problem, frame, w2, **SOLUTION_APPROACH)
    B = np.array([[b1.ga, b2.ga], [b1.gb, b2.gb]])
    det = abs(np.linalg.det(B))
    if det == 0:
        raise NotStrictlyPositive("tau u = 0 has a solution vanishing in the Dirichlet sense at both ends")
    if det < 1e-12 * np.linalg.norm(B) ** 2:
        raise NumericalQualityError(
            f"Dirichlet data of the kernel basis are numerically dependent (|det| / |B|^2 = "
            f"{det / np.linalg.norm(B) ** 2:.2e})")
    c1 = np.linalg.solve(B, [0.0, 1.0])
    c2 = np.linalg.solve(B, [1.0, 0.0])
    dp = lambda c, end: c[0] * getattr(b1, "gp" + end) + c[1] * getattr(b2, "gp" + end)
    u1pa, u1pb, u2pa, u2pb = dp(c1, "a"), dp(c1, "b"), dp(c2, "a"), dp(c2, "b")
    return (1.0 / u1pa) * np.array([[-u2pa, 1.0], [u1pa * u2pb - u1pb * u2pa, u1pb]])


def _normalize_det(R):
    det = float(np.linalg.det(R))
    if det <= 0:
        raise NumericalQualityError(f"computed Krein matrix has det {det:.6g}")
    return R / math.sqrt(det), det


def krein(problem, eps_tol: float = POSITIVITY_EPS, verify: bool = False,
          frame: BoundaryFrame | None = None, gate: PositivityReport | None = None) -> ExtensionSpec:
    """Krein-von Neumann extension; refuses unless the minimal operator is strictly positive."""
    frame = frame or boundary_frame(problem)
    d = frame.deficiency
    gate = gate or strict_positivity_gate(problem, eps_tol, frame)
    diag = {"positivity": gate.as_dict(), "deficiency": d}
    if not gate.strictly_positive:
        raise NotStrictlyPositive(
            f"minimal operator is not strictly positive: lowest Friedrichs eigenvalue {gate.lam_min:.6g} < {eps_tol:g}")
    if d == 0:
        return ExtensionSpec("none", provenance="krein", diagnostics=diag)
    if d == 1:
        e = "a" if frame.cls("a").quasi_regular else "b"
        f = _far(e)
        pf = frame.seeds.get(f) if not problem.infinite(f) else None
        if pf is None:
            pf = principal_pair(problem, f)
        bv = boundary_values(problem, frame, pf.principal, **SOLUTION_APPROACH)
        g, gp = bv.at(e)
        scale = math.hypot(g, gp)
        if abs(g) <= 1e-12 * scale:
            raise NumericalFailure(
                f"internal contradiction: principal solution at {f} has vanishing Dirichlet value at {e}")
        ang = math.atan2(g, -gp) % math.pi  # cot(angle) = -g~'/g~
        diag.update(boundary_value=g, boundary_derivative=gp, condition=scale / abs(g))
        kw = {"gamma": ang} if e == "a" else {"delta": ang}
        return separated(provenance="krein", diagnostics=diag, **kw)
    R = rk_from_principal(problem, "a", frame)
    R, det = _normalize_det(R)
    diag.update(det_before_normalization=det, method="principal solutions at a")
    if verify:
        R2, _ = _normalize_det(rk_from_null_basis(problem, frame))
        err = float(np.max(np.abs(R - R2)) / max(1.0, np.max(np.abs(R))))
        diag["cross_check"] = err
        if err > 1e-6:
            raise NumericalQualityError(f"Krein matrix constructions disagree (relative difference {err:.3e})")
    return coupled(0.0, R, provenance="krein", diagnostics=diag)
