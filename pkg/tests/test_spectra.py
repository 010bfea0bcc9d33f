import cmath
import math

import numpy as np
import pytest

from slkvn.boundary import boundary_frame
from slkvn.errors import DeficiencyMismatch
from slkvn.extensions import coupled, friedrichs, krein, separated
from slkvn.spectra import (characteristic, count_below, eigenvalues, kernel_dimension, lowest_eigenvalue,
                           transfer_matrix)

from helpers import bessel, constant, jacobi, krein_constant_root, rel

PI2 = math.pi ** 2
UNIPOTENT = [[1.0, 1.0], [0.0, 1.0]]


@pytest.fixture(scope="module")
def unit():
    prob = constant()
    return prob, boundary_frame(prob)


def test_transfer_matrix_closed_form(unit):
    prob, fr = unit
    assert rel(transfer_matrix(prob, fr, 0.0).M, UNIPOTENT) < 1e-10
    assert rel(transfer_matrix(prob, fr, PI2).M, -np.eye(2)) < 1e-9
    for lam in (-3.0, 2.0, 30.0):
        k = cmath.sqrt(lam)
        c, s = np.cos(k).real, (np.sin(k) / k).real
        M = [[c, s], [-(lam * s), c]]
        tm = transfer_matrix(prob, fr, lam)
        assert rel(tm.M, M) < 1e-9 and tm.det == pytest.approx(1.0, abs=1e-9)


def test_characteristic_examples(unit):
    prob, fr = unit
    assert abs(characteristic(prob, fr, separated(0, 0), PI2)) < 1e-8
    ext = coupled(0, UNIPOTENT)
    for k in (1.0, 3.0, 7.5):
        assert characteristic(prob, fr, ext, k * k) == pytest.approx(2 - 2 * math.cos(k) - k * math.sin(k), abs=1e-9)
    assert abs(characteristic(prob, fr, ext, 4 * PI2)) < 1e-8
    assert abs(characteristic(prob, fr, ext, 0.0)) < 1e-12


def test_dirichlet_spectrum(unit):
    prob, fr = unit
    res = eigenvalues(prob, fr, separated(0, 0), (0.5, 100), nodes=120)
    assert rel(res.values, [PI2, 4 * PI2, 9 * PI2]) < 1e-9
    assert all(e.multiplicity == 1 for e in res.eigenvalues)


def test_krein_spectrum(unit):
    prob, fr = unit
    res = eigenvalues(prob, fr, coupled(0, UNIPOTENT), (-1, 100), nodes=150)
    assert res.eigenvalues[0].multiplicity == 2 and abs(res.eigenvalues[0].value) < 1e-9
    assert res.values[2] == pytest.approx(4 * PI2, rel=1e-9)
    assert res.values[3] == pytest.approx(krein_constant_root(1) ** 2, rel=1e-9)


def test_jacobi_neumann_spectrum():
    prob = jacobi(-0.5, -0.5)
    res = eigenvalues(prob, None, separated(math.pi / 2, math.pi / 2), (-0.5, 10), nodes=80)
    assert np.allclose(res.values, [0, 1, 4, 9], atol=1e-7)


def test_periodic_double_eigenvalues(unit):
    prob, fr = unit
    res = eigenvalues(prob, fr, coupled(0, np.eye(2)), (1, 50), nodes=150)
    assert [e.multiplicity for e in res.eigenvalues] == [2]
    assert res.eigenvalues[0].value == pytest.approx(4 * PI2, rel=1e-9)


def test_antiperiodic(unit):
    prob, fr = unit
    res = eigenvalues(prob, fr, coupled(math.pi, np.eye(2)), (1, 100), nodes=150)
    assert rel(res.values, [PI2, PI2, 9 * PI2, 9 * PI2]) < 1e-8


def test_kernel_dimension(unit):
    prob, fr = unit
    assert kernel_dimension(prob, fr, krein(prob, frame=fr)) == 2
    assert kernel_dimension(prob, fr, friedrichs(prob, fr)) == 0
    half = constant(b="inf", q="1")
    assert kernel_dimension(half, None, krein(half)) == 1


def test_mismatch(unit):
    prob, fr = unit
    with pytest.raises(DeficiencyMismatch):
        characteristic(prob, fr, separated(0, None), 1.0)
    bes = bessel(0, 0, 1)
    with pytest.raises(DeficiencyMismatch):
        transfer_matrix(bes, None, 1.0)
    with pytest.raises(DeficiencyMismatch):
        eigenvalues(bes, None, coupled(0, UNIPOTENT), (0, 10), nodes=10)


def test_limit_point_end_spectrum():
    # Bessel gamma = 1 with alpha = beta = 0 is -u'' + (3/4) x^-2 u: the Friedrichs eigenvalues are j_{1,n}^2
    prob = bessel(0, 0, 1)
    res = eigenvalues(prob, None, friedrichs(prob), (1, 60), nodes=80)
    assert rel(res.values, [3.8317059702075125 ** 2, 7.015586669815619 ** 2]) < 1e-7


def test_zero_counting(unit):
    prob, fr = unit
    ext = separated(0, 0)
    assert [count_below(prob, fr, ext, lam) for lam in (5.0, 20.0, 50.0, 100.0)] == [0, 1, 2, 3]
    assert lowest_eigenvalue(prob, fr, ext) == pytest.approx(PI2, rel=1e-10)
    assert lowest_eigenvalue(prob, fr, separated(math.pi / 4, math.pi / 4)) == pytest.approx(-1.0, rel=1e-9)


def test_tolerance_stability(unit):
    prob, fr = unit
    ext = separated(0.3, 1.1)
    r1 = eigenvalues(prob, fr, ext, (0, 50), nodes=60).values
    r2 = eigenvalues(prob, fr, ext, (0, 50), nodes=60, rtol=5e-11).values
    assert rel(r1, r2) < 1e-7


def test_counting_near_strongly_singular_regular_end():
    # u ~ s^(1 + beta) is tiny at the seed when beta is close to -1
    prob = jacobi(-0.3, -0.7)
    fr = boundary_frame(prob)
    ext = friedrichs(prob, fr)
    assert [count_below(prob, fr, ext, lam) for lam in (-16.0, 0.5, 5.0)] == [0, 0, 2]
    assert lowest_eigenvalue(prob, fr, ext) == pytest.approx(1.0, rel=1e-8)
