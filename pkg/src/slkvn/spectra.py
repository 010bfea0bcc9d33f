"""Transfer matrices, characteristic functions and eigenvalue search.

Solutions of (tau - lam) u = 0 are shot from each endpoint to the
midpoint c.  At a quasi-regular end the seed is the generalized boundary
data itself: frame coordinates (A, B) = (g~, g~') at singular ends, plain
(g, g^[1]) at regular ends.  At a limit-point end the principal solution
is used, and at an infinite end a Dirichlet condition at the cutoff.

With G_e(lam) the 2x2 map from boundary data at ``e`` to (g, g^[1])(c),
the transfer matrix is M = G_b^-1 G_a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .boundary import BoundaryFrame, boundary_frame
from .errors import DeficiencyMismatch, IntegrationError, NotBoundedBelow, NumericalFailure
from .families import REGULAR, BasisSolution
from .quasi_ode import (NumericSolution, _System, approach_distances,
                        seed_distance, solve_segment)

RANK_THRESHOLD = 1e-6
# det M = 1 to ~1e-10 up to lambda ~ 300 needs a tighter solve than the quasi-ODE default
SHOOT_RTOL = 1e-11
KERNEL_WINDOW = 1e-5


@dataclass(frozen=True)
class TransferMatrix:
    lam: float
    M: np.ndarray
    det: float


@dataclass(frozen=True)
class Eigenvalue:
    value: float
    multiplicity: int
    residual: float
    confidence: str = "bracketed"  # or "tangency"


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: tuple[Eigenvalue, ...]
    window: tuple[float, float]
    extension: object
    diagnostics: dict = field(default_factory=dict)

    @property
    def values(self) -> list[float]:
        """Eigenvalues repeated according to multiplicity."""
        out = []
        for e in self.eigenvalues:
            out.extend([e.value] * e.multiplicity)
        return out


# ---------------------------------------------------------------- shooting

def _min_t(sol, half):
    return min(pc.t_lo for pc in sol.pieces if pc.half == half)


def _seed_plan(frame: BoundaryFrame, end: str):
    """(mode, frame pair or None, seed distance, principal-only?) for shooting from ``end``."""
    problem = frame.problem
    cls = frame.cls(end)
    pair = frame.pair(end)
    if pair is None:
        if problem.infinite(end):
            return "cutoff", None, seed_distance(problem, end), True
        pair = frame.seeds.get(end)
        if pair is None:
            raise NotBoundedBelow(f"no principal solution at limit-point endpoint {end}")
        lp = True
    else:
        lp = False
    if problem.infinite(end):
        return "cutoff", None, seed_distance(problem, end), lp
    if cls.kind == REGULAR and isinstance(pair.principal, NumericSolution):
        # numeric frames at regular ends are canonical: boundary data are plain (g, g^[1]).
        # Closed-form frames go through frame coordinates instead, which stay exact
        # when 1/p is only barely integrable and plain seeding converges like s^-beta
        return "quasi", None, seed_distance(problem, end), lp
    s = seed_distance(problem, end)
    if isinstance(pair.principal, NumericSolution):
        s = max(s, math.exp(max(_min_t(pair.principal, end), _min_t(pair.nonprincipal, end))))
    return "frame", (pair.principal, pair.nonprincipal), s, lp


def end_map(frame: BoundaryFrame, end: str, lam: float, data, rtol=SHOOT_RTOL,
            events=None):
    """(g, g^[1]) at the midpoint for solutions with boundary data columns ``data`` (2 x k)."""
    problem = frame.problem
    L = problem.length
    mode, fr, s0, _ = _seed_plan(frame, end)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[0] != 2:
        data = data.T
    if mode == "cutoff":
        # Dirichlet at the cutoff: only one solution exists there
        data = np.tile(np.array([[0.0], [1.0]]), (1, data.shape[1]))
        mode = "quasi"
    sys_ = _System(problem, lam, end, "frame" if mode == "frame" else "quasi", fr, frame.lam0)
    y0 = data.T.ravel()
    sol = solve_segment(sys_, math.log(s0), math.log(L / 2), y0, rtol=rtol, events=events)
    y = sys_.to_quasi(math.log(L / 2), sol.y[:, -1])
    out = y.reshape(-1, 2).T
    return (out, sol) if events is not None else out


def transfer_matrix(problem, frame: BoundaryFrame | None, lam: float, rtol=SHOOT_RTOL) -> TransferMatrix:
    frame = frame or boundary_frame(problem)
    if frame.deficiency != 2:
        raise DeficiencyMismatch("transfer matrix needs both endpoints quasi-regular")
    I = np.eye(2)
    Ga = end_map(frame, "a", lam, I, rtol)
    Gb = end_map(frame, "b", lam, I, rtol)
    M = np.linalg.solve(Gb, Ga)
    return TransferMatrix(float(lam), M, float(np.linalg.det(M)))


def _angle_data(angle):
    return np.array([math.sin(angle), -math.cos(angle)])


def _coupled_value(M, phi, R):
    R = np.asarray(R, dtype=float)
    T = M[0, 0] * R[1, 1] + M[1, 1] * R[0, 0] - M[0, 1] * R[1, 0] - M[1, 0] * R[0, 1]
    if phi == math.pi:
        return 2.0 + T  # det(M + R)
    return 2.0 * math.cos(phi) - T  # = e^{-i phi} det(M - e^{i phi} R)


def characteristic(problem, frame: BoundaryFrame | None, ext, lam: float, rtol=SHOOT_RTOL) -> float:
    """Real function of lam whose zeros are the eigenvalues of the extension."""
    frame = frame or boundary_frame(problem)
    _check_ext(frame, ext)
    if ext.kind == "coupled":
        M = transfer_matrix(problem, frame, lam, rtol).M
        return _coupled_value(M, ext.phi, ext.R)
    da = _angle_data(ext.gamma) if ext.gamma is not None else np.array([0.0, 1.0])
    db = _angle_data(ext.delta) if ext.delta is not None else np.array([0.0, 1.0])
    ga = end_map(frame, "a", lam, da[:, None], rtol)[:, 0]
    gb = end_map(frame, "b", lam, db[:, None], rtol)[:, 0]
    return float(gb[0] * ga[1] - gb[1] * ga[0])


def _check_ext(frame, ext):
    d = frame.deficiency
    if ext.kind == "coupled" and d != 2:
        raise DeficiencyMismatch(f"coupled conditions need deficiency 2, problem has {d}")
    if ext.kind == "none" and d != 0:
        raise DeficiencyMismatch(f"no boundary conditions only for deficiency 0, problem has {d}")
    if ext.kind == "separated":
        for end, val in (("a", ext.gamma), ("b", ext.delta)):
            if (val is not None) != frame.cls(end).quasi_regular:
                raise DeficiencyMismatch(f"separated slot at {end} does not match the endpoint class")


def _rank_test(problem, frame, ext, lam, rtol):
    M = transfer_matrix(problem, frame, lam, rtol).M
    R = np.asarray(ext.R, dtype=float)
    D = M - np.exp(1j * ext.phi) * R
    s = np.linalg.svd(D, compute_uv=False)
    return float(s[0] / (np.linalg.norm(M, 2) + np.linalg.norm(R, 2)))


def eigenvalues(problem, frame: BoundaryFrame | None, ext, window, nodes: int = 400,
                rtol: float = SHOOT_RTOL) -> SpectralResult:
    """All eigenvalues of the extension inside ``window`` found by scan + Brent refinement."""
    frame = frame or boundary_frame(problem)
    _check_ext(frame, ext)
    lo, hi = (float(v) for v in window)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("window must be a finite interval lo < hi")
    f = lambda lam: characteristic(problem, frame, ext, lam, rtol)
    grid = np.linspace(lo, hi, nodes)
    vals = np.array([f(x) for x in grid])
    found: list[Eigenvalue] = []
    tangency_checked = []
    for i in range(nodes - 1):
        f0, f1 = vals[i], vals[i + 1]
        if f0 == 0.0:
            found.append(_finalize(problem, frame, ext, grid[i], f, rtol))
            continue
        if f0 * f1 < 0:
            root = brentq(f, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-12, maxiter=200)
            found.append(_finalize(problem, frame, ext, root, f, rtol))
    if vals[-1] == 0.0:
        found.append(_finalize(problem, frame, ext, grid[-1], f, rtol))
    # tangential zeros: local minima of |f| without a sign change
    for i in range(1, nodes - 1):
        a, b, c = abs(vals[i - 1]), abs(vals[i]), abs(vals[i + 1])
        if not (b <= a and b <= c) or vals[i - 1] * vals[i + 1] <= 0 or vals[i] * vals[i - 1] <= 0:
            continue
        sgn = math.copysign(1.0, vals[i])
        res = minimize_scalar(lambda x: sgn * f(x), bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(grid[i]))})
        x, fx = float(res.x), abs(float(res.fun))
        scale = max(a, c)
        tangency_checked.append((float(grid[i]), fx))
        # the minimizer only resolves a quadratic zero to ~sqrt(eps) in lam, so the
        # screen is loose; coupled candidates must then pass the rank test
        if not (fx <= 1e-6 * scale or fx <= 1e-12):
            continue
        if any(abs(x - e.value) <= 1e-6 * max(1.0, abs(x)) for e in found):
            continue
        if ext.kind == "coupled":
            x = _refine_double(problem, frame, ext, grid[i - 1], grid[i + 1], x, rtol)
            ev = _finalize(problem, frame, ext, x, f, rtol, tangency=True)
            if ev.multiplicity == 2 or ev.residual <= 1e-9 * scale:
                found.append(ev)
        elif fx <= 1e-9 * scale or fx <= 1e-12:
            found.append(_finalize(problem, frame, ext, x, f, rtol, tangency=True))
    found.sort(key=lambda e: e.value)
    return SpectralResult(tuple(found), (lo, hi), ext,
                          {"nodes": nodes, "tangency_candidates": tangency_checked})


def _refine_double(problem, frame, ext, lo, hi, guess, rtol):
    """A double root of the coupled determinant is a zero of every entry of M - e^{i phi} R.

    The determinant is quadratic there, so its minimizer is only accurate to
    sqrt(machine eps); a sign-changing entry pins the root to full precision.
    """
    R = math.cos(ext.phi) * np.asarray(ext.R, dtype=float)
    D = lambda lam: transfer_matrix(problem, frame, lam, rtol).M - R
    Dlo, Dhi = D(lo), D(hi)
    best = None
    for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)):
        if Dlo[i, j] * Dhi[i, j] < 0:
            jump = abs(Dhi[i, j] - Dlo[i, j])
            if best is None or jump > best[0]:
                best = (jump, i, j)
    if best is None:
        return guess
    _, i, j = best
    return float(brentq(lambda lam: D(lam)[i, j], lo, hi, xtol=1e-14, rtol=1e-12, maxiter=200))


def _finalize(problem, frame, ext, lam, f, rtol, tangency=False):
    lam = float(lam)
    res = abs(f(lam))
    mult = 1
    conf = "tangency" if tangency else "bracketed"
    if ext.kind == "coupled":
        if _rank_test(problem, frame, ext, lam, rtol) < RANK_THRESHOLD:
            mult = 2
            conf = "bracketed" if not tangency else "rank-deficient"
    return Eigenvalue(lam, mult, res, conf)


def kernel_dimension(problem, frame: BoundaryFrame | None, ext, rtol=SHOOT_RTOL) -> int:
    """Number of independent solutions of tau u = 0 obeying the extension's conditions."""
    frame = frame or boundary_frame(problem)
    _check_ext(frame, ext)
    if ext.kind == "coupled":
        M = transfer_matrix(problem, frame, 0.0, rtol).M
        R = np.asarray(ext.R, dtype=float)
        D = M - np.exp(1j * ext.phi) * R
        s = np.linalg.svd(D, compute_uv=False)
        scale = np.linalg.norm(M, 2) + np.linalg.norm(R, 2)
        return int(np.sum(s / scale < RANK_THRESHOLD))
    if problem.infinite("a") or problem.infinite("b"):
        # a decaying kernel element cannot be shot stably to the midpoint; count instead
        d = KERNEL_WINDOW
        return count_below(problem, frame, ext, d, rtol) - count_below(problem, frame, ext, -d, rtol)
    da = _angle_data(ext.gamma) if ext.gamma is not None else np.array([0.0, 1.0])
    db = _angle_data(ext.delta) if ext.delta is not None else np.array([0.0, 1.0])
    ga = end_map(frame, "a", 0.0, da[:, None], rtol)[:, 0]
    gb = end_map(frame, "b", 0.0, db[:, None], rtol)[:, 0]
    w = abs(gb[0] * ga[1] - gb[1] * ga[0])
    return int(w <= 1e-7 * np.linalg.norm(ga) * np.linalg.norm(gb))


# ---------------------------------------------------------------- lowest eigenvalue

def count_below(problem, frame: BoundaryFrame, ext, lam: float, rtol=SHOOT_RTOL) -> int:
    """Zeros in (a, b) of the solution obeying the left condition: the number of eigenvalues below lam.

    Valid for separated conditions of Dirichlet (Friedrichs) type at the right end.
    """
    L = problem.length
    da = _angle_data(ext.gamma) if ext.gamma is not None else np.array([0.0, 1.0])
    mode, fr, s0, _ = _seed_plan(frame, "a")
    if mode == "cutoff":
        da, mode = np.array([0.0, 1.0]), "quasi"
    sys_a = _System(problem, lam, "a", "frame" if mode == "frame" else "quasi", fr, frame.lam0)
    t0 = math.log(s0)
    if mode == "frame" and frame.cls("a").kind == REGULAR:
        # near a regular end g = A v + B u is tiny for Dirichlet-like data, and
        # atol-sized errors in A flip its sign; count in plain coordinates instead
        da = sys_a.to_quasi(t0, da)
        sys_a = _System(problem, lam, "a")

    def ev_a(t, y):
        return sys_a.to_quasi(t, y)[0]

    sol = solve_segment(sys_a, t0, math.log(L / 2), da, rtol=rtol, events=ev_a)
    # a Dirichlet seed starts on a zero; the integrator reports it as a crossing
    zeros = int(np.sum(np.abs(sol.t_events[0] - t0) > 1e-9 * max(1.0, abs(t0))))
    yc = sys_a.to_quasi(math.log(L / 2), sol.y[:, -1])
    stop = float(approach_distances(problem)[-1]) if not problem.infinite("b") else seed_distance(problem, "b")
    mode_b, fr_b, s_b, _ = _seed_plan(frame, "b")
    if mode_b == "frame" and frame.cls("b").kind != REGULAR:
        # continue in frame coordinates of the right end so the count reaches the endpoint
        u, v = fr_b
        uu, uq = u.eval(L / 2, L / 2)
        vv, vq = v.eval(L / 2, L / 2)
        Y = np.array([[float(vv), float(uu)], [float(vq), float(uq)]])
        AB = np.linalg.solve(Y, yc)
        sys_b = _System(problem, lam, "b", "frame", fr_b, frame.lam0)
        y0 = AB
        stop = s_b
    else:
        sys_b = _System(problem, lam, "b")
        y0 = yc

    def ev_b(t, y):
        return sys_b.to_quasi(t, y)[0]

    sol = solve_segment(sys_b, math.log(L / 2), math.log(stop), y0, rtol=rtol, events=ev_b)
    zeros += len(sol.t_events[0])
    return zeros


def lowest_eigenvalue(problem, frame: BoundaryFrame | None, ext, rtol=SHOOT_RTOL,
                      rel_tol: float = 1e-10) -> float:
    """Lowest eigenvalue of a Dirichlet/Friedrichs-type separated extension via zero counting."""
    frame = frame or boundary_frame(problem)
    f = lambda lam: characteristic(problem, frame, ext, lam, rtol)
    N = lambda lam: count_below(problem, frame, ext, lam, rtol)
    scale = 1.0 / problem.length ** 2
    lo, hi = -scale, scale
    for _ in range(80):
        if N(lo) == 0:
            break
        lo = 4 * lo
    else:
        raise NotBoundedBelow("no lower bound found for the spectrum")
    for _ in range(80):
        n_hi = N(hi)
        if n_hi >= 1:
            break
        lo, hi = hi, 4 * hi
    else:
        raise NumericalFailure("no eigenvalue found below 4^80 / L^2")
    # bisect only until (lo, hi] holds exactly one eigenvalue
    while n_hi > 1 and hi - lo > 1e-3 * max(abs(hi), abs(lo), scale):
        mid = 0.5 * (lo + hi)
        n_mid = N(mid)
        if n_mid >= 1:
            hi, n_hi = mid, n_mid
        else:
            lo = mid
    flo, fhi = f(lo), f(hi)
    step = hi - lo
    for _ in range(60):
        if flo * fhi <= 0:
            break
        lo -= step
        step *= 2
        flo = f(lo)
    else:
        raise NumericalFailure("could not bracket the lowest eigenvalue")
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    return float(brentq(f, lo, hi, xtol=1e-14, rtol=rel_tol, maxiter=200))
