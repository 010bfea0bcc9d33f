import math

import numpy as np
import pytest

from slkvn.boundary import boundary_frame, boundary_values
from slkvn.errors import LimitPointError, NotStrictlyPositive, ParameterError
from slkvn.extensions import (SOLUTION_APPROACH, coupled, friedrichs, krein, no_conditions, null_solutions,
                              rk_from_null_basis, rk_from_principal, separated, strict_positivity_gate)
from slkvn.oracles import bessel_rk_closed

from helpers import bessel, constant, jacobi, rel

UNIPOTENT = [[1.0, 1.0], [0.0, 1.0]]


def test_descriptors():
    assert separated(0, 0) == separated(0.0, 0.0, provenance="user")
    assert coupled(0, UNIPOTENT).R == ((1.0, 1.0), (0.0, 1.0))
    with pytest.raises(ParameterError, match="det R = 1 violated"):
        coupled(0, [[1, 1], [1, 1]])
    with pytest.raises(ParameterError):
        separated(math.pi, 0)
    with pytest.raises(ParameterError):
        coupled(2 * math.pi, UNIPOTENT)
    assert coupled(0.5, UNIPOTENT).as_dict()["R"] == [[1.0, 1.0], [0.0, 1.0]]
    assert no_conditions().as_dict() == {"kind": "none", "provenance": "user"}


def test_friedrichs_descriptors():
    f = friedrichs(constant())
    assert (f.kind, f.gamma, f.delta, f.provenance) == ("separated", 0.0, 0.0, "friedrichs")
    f = friedrichs(bessel(0, 0, 1))
    assert (f.gamma, f.delta) == (None, 0.0)
    assert friedrichs(jacobi(1.5, 1.5)).kind == "none"


def test_gate():
    rep = strict_positivity_gate(constant())
    assert rep.lam_min == pytest.approx(math.pi ** 2, rel=1e-9) and rep.strictly_positive
    rep = strict_positivity_gate(jacobi(0.5, 0.5))
    assert abs(rep.lam_min) < 1e-6 and not rep.strictly_positive
    rep = strict_positivity_gate(constant(b="inf", cutoff=200))
    assert rep.details["extrapolated"] and not rep.strictly_positive


def test_krein_constant():
    ext = krein(constant(), verify=True)
    assert ext.kind == "coupled" and ext.phi == 0.0 and ext.provenance == "krein"
    assert rel(ext.R, UNIPOTENT) < 1e-9
    assert ext.diagnostics["cross_check"] < 1e-9


def test_krein_half_line():
    ext = krein(constant(b="inf", q="1"))
    assert ext.kind == "separated" and ext.delta is None
    assert ext.gamma == pytest.approx(math.pi / 4, abs=1e-6)


def test_krein_refusals():
    with pytest.raises(NotStrictlyPositive, match="not strictly positive"):
        krein(jacobi(0.5, 0.5))
    with pytest.raises(LimitPointError):
        rk_from_principal(bessel(0, 0, 1))
    with pytest.raises(LimitPointError):
        rk_from_null_basis(bessel(0, 0, 1))


def test_krein_deficiency_zero():
    ext = krein(constant(a="-inf", b="inf", q="1", cutoff=20))
    assert ext.kind == "none"
    assert ext.diagnostics["positivity"]["lam_min"] == pytest.approx(1.0, abs=1e-4)
    # limit point at both ends, but the constant solution is an L^2 eigenfunction
    with pytest.raises(NotStrictlyPositive):
        krein(jacobi(1.5, 1.5))


def test_rk_routes_constant():
    prob = constant()
    assert rel(rk_from_null_basis(prob), UNIPOTENT) < 1e-9
    assert rel(rk_from_principal(prob, "a"), UNIPOTENT) < 1e-9
    assert rel(rk_from_principal(prob, "b"), UNIPOTENT) < 1e-9


def test_rk_routes_bessel_and_jacobi():
    prob = bessel(0, 0, 0.5)
    ra, rb = rk_from_principal(prob, "a"), rk_from_principal(prob, "b")
    assert rel(ra, rb) < 1e-8 and rel(ra, UNIPOTENT) < 1e-8
    R = rk_from_null_basis(jacobi(-0.5, -0.5))
    assert rel(R, [[1, math.pi], [0, 1]]) < 1e-8
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("prob", [constant(p="1 + x", q="1 + x^2"), bessel(0.5, 0.5, 0.25), jacobi(-0.5, 0.5)])
def test_kernel_membership(prob):
    fr = boundary_frame(prob)
    ext = krein(prob, frame=fr)
    R = np.array(ext.R)
    for w in null_solutions(prob):
        bv = boundary_values(prob, fr, w, **SOLUTION_APPROACH)
        a, b = np.array([bv.ga, bv.gpa]), np.array([bv.gb, bv.gpb])
        scale = max(1.0, np.max(np.abs(b)))
        assert np.max(np.abs(b - R @ a)) / scale < 1e-7
        # Dirichlet data at both ends never vanish together for a kernel element
        assert math.hypot(bv.ga, bv.gb) > 1e-3 * scale


def test_tiny_gamma_bessel():
    R = bessel_rk_closed(0.55, -0.3, 1e-10)
    assert rel(rk_from_principal(bessel(0.55, -0.3, 1e-10)), R) < 1e-9
    with pytest.raises(ParameterError, match="too small"):
        rk_from_principal(bessel(0.55, -0.3, 5e-324))
