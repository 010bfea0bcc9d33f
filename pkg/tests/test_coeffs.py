import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from slkvn import make_problem
from slkvn.coeffs import (Bessel, BlackHole, Jacobi, descriptor_from_mapping, descriptor_to_mapping,
                          eval_coefficients, probe_report)
from slkvn.errors import DomainError, ParameterError

from helpers import bessel, blackhole, constant, jacobi


def test_bessel_with_vanishing_potential():
    prob = bessel(0, 0, 0.5)
    assert prob.params["qcoef"] == 0.0
    assert eval_coefficients(prob, 0.25) == (1.0, 0.0, 1.0)


def test_blackhole_coefficients():
    assert eval_coefficients(blackhole(2, 0), 0.5) == (0.25, 0.0, 1.0)


def test_jacobi_midpoint_weights():
    prob = jacobi(-0.5, -0.5)
    assert eval_coefficients(prob, 0.0) == (1.0, 0.0, 1.0)
    p, q, r = eval_coefficients(prob, 0.6)
    assert p == pytest.approx(math.sqrt(1 - 0.36), rel=1e-14)
    assert r == pytest.approx(1 / math.sqrt(1 - 0.36), rel=1e-14)


@pytest.mark.parametrize("desc, msg", [
    ({"family": "bessel", "alpha": 0, "beta": 2, "gamma": 0}, "beta < 1 violated"),
    ({"family": "bessel", "alpha": -1, "beta": 0, "gamma": 0}, "alpha > -1 violated"),
    ({"family": "bessel", "alpha": 0, "beta": 0, "gamma": -0.1}, "gamma >= 0 violated"),
    ({"family": "bessel", "alpha": 0, "beta": 0, "gamma": 0, "b": 0}, "b > 0 violated"),
    ({"family": "blackhole", "alpha": 1, "beta": 0, "m": 2, "M": 1}, "0 < m <= M violated"),
    ({"family": "generic", "a": 1, "b": 1}, "a < b violated"),
    ({"family": "generic", "a": 0, "b": 1, "cutoff": 3}, "cutoff only applies"),
    ({"family": "generic", "a": 0, "b": "inf", "cutoff": -1}, "cutoff must lie inside"),
    ({"family": "jacobi", "alpha": 0, "beta": 0, "zeta": 1}, "problem.zeta: unknown key"),
    ({"family": "laguerre"}, "family: unknown family"),
])
def test_rejections(desc, msg):
    with pytest.raises(ParameterError, match=msg):
        make_problem(desc)


def test_generic_positivity_probe():
    with pytest.raises(ParameterError, match="p\\(x\\) > 0 violated"):
        constant(p="x - 0.5")
    rep = probe_report(constant(p="1 + x"))
    assert rep["n"] == 1000 and rep["min_p"] > 1 and rep["min_r"] == 1


def test_eval_outside_interval():
    prob = constant()
    for x in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(DomainError):
            eval_coefficients(prob, x)


def test_infinite_end_cutoff():
    prob = constant(b="inf")
    assert prob.infinite("b") and not prob.infinite("a")
    assert prob.hi == 40.0 and prob.cutoff == 40.0
    assert prob.with_cutoff(200).hi == 200.0
    both = constant(a="-inf", b="inf")
    assert (both.lo, both.hi) == (-40.0, 40.0)


def test_descriptor_round_trip():
    for desc in (Bessel(0.5, -1, 0.25, 2.0), BlackHole(1.5, 1, b=0.5), Jacobi(-0.5, 0.5)):
        assert descriptor_from_mapping(descriptor_to_mapping(desc)) == desc


def test_callable_and_expression_agree():
    p1 = constant(p="1 + x^2", q="exp(-x)")
    p2 = constant(p=lambda x: 1 + x ** 2, q=lambda x: np.exp(-x))
    for x in (0.1, 0.5, 0.9):
        assert eval_coefficients(p1, x) == pytest.approx(eval_coefficients(p2, x), rel=1e-14)


xs = st.floats(0.001, 0.999)


@given(al=st.floats(-0.9, 3), be=st.floats(-3, 0.9), ga=st.floats(0, 3), x=xs)
def test_bessel_matches_formula(al, be, ga, x):
    p, q, r = eval_coefficients(bessel(al, be, ga), x)
    c = ((2 + al - be) ** 2 * ga ** 2 - (1 - be) ** 2) / 4
    assert p == pytest.approx(x ** be, rel=1e-14)
    assert r == pytest.approx(x ** al, rel=1e-14)
    assert q == pytest.approx(c * x ** (be - 2), rel=1e-14, abs=1e-300)


@given(al=st.floats(-0.95, 2), be=st.floats(-0.95, 2), x=st.floats(-0.999, 0.999))
def test_jacobi_matches_formula(al, be, x):
    p, q, r = eval_coefficients(jacobi(al, be), x)
    assert p == pytest.approx((1 - x) ** (al + 1) * (1 + x) ** (be + 1), rel=1e-13)
    assert r == pytest.approx((1 - x) ** al * (1 + x) ** be, rel=1e-13)
    assert q == 0


@given(al=st.floats(-2, 3), be=st.floats(-2, 3), x=xs)
def test_deterministic(al, be, x):
    assert eval_coefficients(blackhole(al, be), x) == eval_coefficients(blackhole(al, be), x)
