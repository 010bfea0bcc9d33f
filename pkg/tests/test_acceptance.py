"""End-to-end acceptance checks, one recorded verdict per criterion.

Run directly (``python tests/test_acceptance.py``) or through pytest; the
terminal summary prints one PASS/FAIL line per criterion.
"""

import math
import sys

import numpy as np
import pytest

from slkvn import make_problem
from slkvn.boundary import boundary_frame
from slkvn.classify import classify_endpoint
from slkvn.cli import parse_config, run
from slkvn.errors import LimitPointError, NotStrictlyPositive
from slkvn.extensions import (coupled, friedrichs, krein, rk_from_null_basis, rk_from_principal, separated,
                              strict_positivity_gate)
from slkvn.oracles import bessel_rk_closed, blackhole_rk_closed, classification_closed, jacobi_rk_closed
from slkvn.spectra import eigenvalues

from helpers import bessel, blackhole, constant, jacobi, krein_constant_root

PI2 = math.pi ** 2
QUASI_REGULAR = ("Regular", "LimitCircle")


def entry_dev(numeric, closed):
    """Entrywise relative deviation; absolute where the closed entry is zero."""
    numeric, closed = np.asarray(numeric, float), np.asarray(closed, float)
    dev = np.where(closed == 0, np.abs(numeric), np.abs(numeric - closed) / np.where(closed == 0, 1, np.abs(closed)))
    return float(np.max(dev))


# ---------------------------------------------------------------- 1: black hole

def test_blackhole_krein(acceptance):
    worst, bad = 0.0, []
    for al, be in ((1, 0), (2, 2), (1.5, 1)):
        for b in (0.5, 1.0, 2.0):
            dev = float(np.max(np.abs(np.array(krein(blackhole(al, be, b)).R) - blackhole_rk_closed())))
            worst = max(worst, dev)
            if dev > 1e-6:
                bad.append((al, be, b))
    acceptance(1, not bad, f"9 black-hole cases, max |R - J| = {worst:.1e}")
    assert not bad


# ---------------------------------------------------------------- 2: Bessel grid

def test_bessel_krein_grid(acceptance):
    worst = worst_det = 0.0
    bad = []
    for al in (-0.5, 0.0, 0.5, 1.0):
        for be in (-1.0, 0.0, 0.5, 0.9):
            for ga in (0.0, 0.25, 0.5, 0.9):
                ext = krein(bessel(al, be, ga), verify=True)
                dev = entry_dev(ext.R, bessel_rk_closed(al, be, ga, 1.0))
                ddet = abs(ext.diagnostics["det_before_normalization"] - 1)
                worst, worst_det = max(worst, dev), max(worst_det, ddet)
                if dev > 1e-5 or ddet > 1e-8:
                    bad.append((al, be, ga))
    acceptance(2, not bad, f"64 Bessel points, max rel dev {worst:.1e}, max |det - 1| {worst_det:.1e}")
    assert not bad


# ---------------------------------------------------------------- 3: Jacobi cases

JACOBI_POINTS = {
    "I": [(-0.5, -0.5), (-0.3, -0.7), (-0.8, -0.2)],
    "II": [(-0.5, 0.5), (-0.3, 0.6), (-0.7, 0.2)],
    "III": [(0.5, -0.5), (0.6, -0.3), (0.2, -0.7)],
    "IV": [(0.0, -0.5), (0.0, -0.3), (0.0, -0.8)],
    "V": [(-0.5, 0.0), (-0.3, 0.0), (-0.8, 0.0)],
}


def test_jacobi_krein_cases(acceptance):
    worst, bad = 0.0, []
    for case, points in JACOBI_POINTS.items():
        for al, be in points:
            dev = entry_dev(krein(jacobi(al, be)).R, jacobi_rk_closed(al, be))
            worst = max(worst, dev)
            if dev > 1e-5:
                bad.append((case, al, be))
    anchors = (np.allclose(jacobi_rk_closed(-0.5, -0.5), [[1, math.pi], [0, 1]], atol=1e-13)
               and np.allclose(jacobi_rk_closed(-0.5, 0.5), [[0, 1], [-1, 0]], atol=1e-13)
               and abs(jacobi_rk_closed(0.0, -0.5)[1, 1] - math.sqrt(2) * math.log(2)) < 1e-13)
    acceptance(3, not bad and anchors, f"15 Jacobi points over cases I-V, max rel dev {worst:.1e}")
    assert not bad and anchors


# ---------------------------------------------------------------- 4: classification

def test_classification_table(acceptance):
    grid = (-0.9, -0.5, 0.0, 0.5, 0.9, 1.5)
    bad = []
    for al in grid:
        for be in grid:
            want = classification_closed("jacobi", {"alpha": al, "beta": be})
            prob = jacobi(al, be)
            for end in "ab":
                got = classify_endpoint(prob, end, method="numeric").kind
                if got != want[end]:
                    bad.append((al, be, end, got))
    for ga in (0.0, 0.5, 0.99, 1.0, 1.5):
        got = classify_endpoint(bessel(0, 0, ga), "a", method="numeric").kind
        # q vanishes at gamma = 1/2, where the end is genuinely regular
        if (got in QUASI_REGULAR) != (ga < 1):
            bad.append(("bessel", ga, got))
    acceptance(4, not bad, f"72 Jacobi ends + 5 Bessel thresholds, mismatches {bad or 'none'}")
    assert not bad


# ---------------------------------------------------------------- 5, 6: spectra of the constant problem

WINDOW = (-5.0, 200.0)
NODES = 200


@pytest.fixture(scope="module")
def unit_spectra():
    prob = constant()
    fr = boundary_frame(prob)
    out = {"friedrichs": eigenvalues(prob, fr, friedrichs(prob, fr), WINDOW, nodes=NODES),
           "krein": eigenvalues(prob, fr, krein(prob, frame=fr), WINDOW, nodes=NODES)}
    for g, d in ((math.pi / 4, math.pi / 4), (math.pi / 2, math.pi / 2), (0.0, math.pi / 2)):
        out[(g, d)] = eigenvalues(prob, fr, separated(g, d), WINDOW, nodes=NODES)
    return out


def test_spectral_checks(acceptance, unit_spectra):
    fr_vals = unit_spectra["friedrichs"].values[:3]
    ok_f = len(fr_vals) == 3 and all(abs(v - k * k * PI2) <= 1e-7 * k * k * PI2 for k, v in zip((1, 2, 3), fr_vals))
    kr = unit_spectra["krein"]
    zero = kr.eigenvalues[0]
    ok_zero = abs(zero.value) < 1e-7 and zero.multiplicity == 2 and zero.residual < 1e-7
    nonzero = [e.value for e in kr.eigenvalues[1:3]]
    root = krein_constant_root(1) ** 2
    ok_k = (len(nonzero) == 2 and abs(nonzero[0] - 4 * PI2) <= 1e-6 * 4 * PI2
            and abs(nonzero[1] - root) <= 1e-5 * root)
    prob = jacobi(-0.5, -0.5)
    jac = eigenvalues(prob, None, separated(math.pi / 2, math.pi / 2), (-0.5, 10), nodes=120).values
    ok_j = len(jac) == 4 and np.allclose(jac, [0, 1, 4, 9], rtol=0, atol=1e-5)
    passed = ok_f and ok_zero and ok_k and ok_j
    acceptance(5, passed, f"Friedrichs {ok_f}, Krein zero x2 {ok_zero}, Krein 4pi^2 / {root:.4f} {ok_k}, "
                          f"Jacobi {{0,1,4,9}} {ok_j}")
    assert passed


def test_ordering(acceptance, unit_spectra):
    lk = unit_spectra["krein"].values[:4]
    lf = unit_spectra["friedrichs"].values[:4]
    violations = []
    for key in ((math.pi / 4, math.pi / 4), (math.pi / 2, math.pi / 2), (0.0, math.pi / 2)):
        lt = unit_spectra[key].values[:4]
        for n in range(4):
            # equal eigenvalues (e.g. 4 pi^2 for Krein and Neumann) get the same slack on both sides
            if not (lk[n] - 1e-7 <= lt[n] <= lf[n] + 1e-7):
                violations.append(f"n={n + 1} ({key[0]:.4f},{key[1]:.4f}): {lk[n]:.6g} <= {lt[n]:.6g} <= {lf[n]:.6g}")
    acceptance(6, not violations, "; ".join(violations) or "12 ordered triples")
    assert not violations


# ---------------------------------------------------------------- 7: refusals

def test_refusals(acceptance):
    checks = {}
    for name, desc in (("jacobi(0.5,0.5)", {"family": "jacobi", "alpha": 0.5, "beta": 0.5}),
                       ("half-line cutoff 200", {"family": "generic", "a": 0, "b": "inf", "cutoff": 200})):
        gate = strict_positivity_gate(make_problem(desc))
        report, code = run(parse_config({"problem": desc, "command": "krein"}))
        checks[name] = (not gate.strictly_positive and code == 2 and report["error"]["category"] == "refusal"
                        and report["error"]["type"] == NotStrictlyPositive.__name__)
    bes = bessel(0, 0, 1)
    refused = []
    for build in (rk_from_principal, rk_from_null_basis, lambda p: bessel_rk_closed(0, 0, 1.0)):
        try:
            build(bes)
        except LimitPointError:
            refused.append(True)
        else:
            refused.append(False)
    checks["bessel gamma=1 coupled refusal"] = all(refused)
    ext = krein(constant(b="inf", q="1"))
    checks["half-line gamma_K = pi/4"] = ext.kind == "separated" and abs(ext.gamma - math.pi / 4) < 1e-6
    failed = [k for k, v in checks.items() if not v]
    acceptance(7, not failed, f"{len(checks) - len(failed)}/{len(checks)} refusal checks" +
               (f", failed: {failed}" if failed else ""))
    assert not failed


# ---------------------------------------------------------------- 8: property suites

from dataclasses import replace  # noqa: E402

from hypothesis import given, settings, strategies as st  # noqa: E402

from slkvn.boundary import boundary_values, limit_of, wronskian_sequence  # noqa: E402
from slkvn.quasi_ode import approach_distances, integrate_ivp, integrate_solution  # noqa: E402
from slkvn.spectra import transfer_matrix  # noqa: E402

from test_boundary import Combo  # noqa: E402

EXAMPLES = 50
EPS = np.finfo(float).eps
BH_PARAMS = ((1, 0), (1.5, 1), (2, 2))


def unit(lo, hi):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


def off_zero(lo, hi, gap=1e-3):
    """Floats in [lo, hi] that are exactly 0 or at least ``gap`` away from it.

    Exponents just off 0 blow the frame normalizations up like 1/exponent.
    """
    parts = [st.just(0.0)] if lo <= 0 <= hi else []
    if lo < -gap:
        parts.append(unit(lo, min(hi, -gap)))
    if hi > gap:
        parts.append(unit(max(lo, gap), hi))
    return st.one_of(*parts)


besselish = st.builds(bessel, unit(-0.5, 1), unit(-1, 0.5), off_zero(0, 0.5))
blackholes = st.builds(lambda ab, b: blackhole(*ab, b=b), st.sampled_from(BH_PARAMS), unit(0.5, 2))
generic = st.builds(lambda c1, c2, c3: constant(p=f"1 + {c1!r}*x", q=repr(c2), r=f"1 + {c3!r}*x^2"),
                    unit(0, 2), unit(0, 3), unit(0, 1))
# one exponent negative keeps the Jacobi operator strictly positive
jacobi_positive = st.builds(lambda a, b, swap: jacobi(b, a) if swap else jacobi(a, b),
                            unit(-0.6, -0.05), off_zero(-0.6, 0.6), st.booleans())
jacobi_moderate = st.builds(jacobi, off_zero(-0.6, 0.6), off_zero(-0.6, 0.6))
positive_problems = st.one_of(besselish, jacobi_positive, generic, blackholes)
lc_problems = st.one_of(besselish, jacobi_moderate, blackholes)


def run_counted(body, *strategies):
    """Run ``body`` as a hypothesis property; returns (examples run, failure or None)."""
    count = [0]

    @settings(max_examples=EXAMPLES, database=None)
    @given(st.tuples(*strategies))
    def prop(args):
        count[0] += 1
        body(*args)

    try:
        prop()
    except Exception as exc:  # hypothesis re-raises the shrunk failure
        return count[0], exc
    return count[0], None


def random_solution(prob, lam, theta):
    s = approach_distances(prob)
    far = float(s[-1]) / 4
    half = prob.length / 2
    return integrate_solution(prob, lam, (half, half), [math.cos(theta), math.sin(theta)],
                              reach={"a": far, "b": far}, rtol=1e-12)


def wronskian_constancy(prob, z, t1, t2, fractions):
    assume_apart = abs(math.sin(t1 - t2)) >= 0.1
    if not assume_apart:
        t2 = t1 + math.pi / 2
    x0 = prob.lo + 0.5 * (prob.hi - prob.lo)
    targets = sorted(prob.lo + f * (prob.hi - prob.lo) for f in fractions)
    y1 = integrate_ivp(prob, z, x0, math.cos(t1), math.sin(t1), targets, rtol=1e-12)
    y2 = integrate_ivp(prob, z, x0, math.cos(t2), math.sin(t2), targets, rtol=1e-12)
    w0 = math.sin(t2 - t1)
    w = y1.u * y2.uq - y1.uq * y2.u
    assert np.max(np.abs(w - w0)) <= 1e-8 * abs(w0)


def bilinear_identity(prob, l1, l2, t1, t2):
    fr = boundary_frame(prob)
    g, h = random_solution(prob, l1, t1), random_solution(prob, l2, t2)
    bg, bh = boundary_values(prob, fr, g), boundary_values(prob, fr, h)
    s = approach_distances(prob)
    for end in "ab":
        G, Gp = bg.at(end)
        if G is None:
            continue
        H, Hp = bh.at(end)
        w = limit_of(wronskian_sequence(prob, g, h, end, s)).value
        lhs = G * Hp - Gp * H
        assert abs(lhs - w) <= 1e-7 * max(abs(w), abs(G * Hp) + abs(Gp * H))


def shift_covariance(prob, C, theta, end):
    fr = boundary_frame(prob)
    pair = fr.pair(end)
    shifted = replace(fr, **{end: replace(pair, nonprincipal=Combo(pair.nonprincipal, pair.principal, 1.0, C))})
    g = random_solution(prob, 0.5, theta)
    b0, b1 = boundary_values(prob, fr, g), boundary_values(prob, shifted, g)
    G0, Gp0 = b0.at(end)
    G1, Gp1 = b1.at(end)
    scale = max(abs(Gp0), abs(C * G0), 1e-12)
    assert abs(G1 - G0) <= 1e-8 * max(abs(G0), 1e-12)
    assert abs(Gp1 - (Gp0 - C * G0)) <= 1e-7 * scale


def unimodular(prob, lam):
    tm = transfer_matrix(prob, None, lam)
    # rounding floor of a 2x2 determinant formed from entries of size ||M||
    floor = 4 * EPS * float(np.sum(tm.M ** 2))
    assert abs(tm.det - 1) <= 1e-9 + floor


def rel_dev(A, B):
    A, B = np.asarray(A, float), np.asarray(B, float)
    return float(np.max(np.abs(A - B)) / max(1.0, np.max(np.abs(B))))


def transfer_at_zero(prob):
    fr = boundary_frame(prob)
    assert rel_dev(transfer_matrix(prob, fr, 0.0).M, rk_from_principal(prob, "a", fr)) <= 1e-8


def path_independence(prob):
    fr = boundary_frame(prob)
    Ra = rk_from_principal(prob, "a", fr)
    assert rel_dev(rk_from_principal(prob, "b", fr), Ra) <= 1e-7
    assert rel_dev(rk_from_null_basis(prob, fr), Ra) <= 1e-7


PROPERTIES = {
    "Wronskian constancy": (wronskian_constancy, positive_problems, unit(-50, 50), unit(0, math.pi),
                            unit(0, math.pi), st.lists(unit(0.02, 0.98), min_size=3, max_size=8)),
    "bilinear identity": (bilinear_identity, lc_problems, unit(-5, 5), unit(-5, 5), unit(0, math.pi),
                          unit(0, math.pi)),
    "nonprincipal shift": (shift_covariance, lc_problems, st.one_of(st.sampled_from((-2.0, 1.0, 10.0)),
                                                                    unit(-2, 10)),
                           unit(0, math.pi), st.sampled_from("ab")),
    "det M = 1": (unimodular, positive_problems, unit(-10, 300)),
    "M(0) = R_K": (transfer_at_zero, positive_problems),
    "R_K path independence": (path_independence, positive_problems),
}


@pytest.mark.parametrize("name", list(PROPERTIES))
def test_property_suite(acceptance, name):
    body, *strategies = PROPERTIES[name]
    n, failure = run_counted(body, *strategies)
    passed = failure is None and n >= EXAMPLES
    acceptance(8, passed, f"{name}: {n} examples" + ("" if failure is None else f", failed: {failure!r:.120}"))
    assert failure is None, failure
    assert n >= EXAMPLES


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
