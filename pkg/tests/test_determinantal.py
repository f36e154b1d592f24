from fractions import Fraction
from math import factorial

import mpmath
import numpy as np
import pytest
from scipy import integrate

from coulomb2d.determinantal import (ginibre_edge_value, ginibre_moment, ginibre_one_point, one_point,
                                     one_point_function, orthonormal_norms, radial_moment)
from coulomb2d.errors import DomainError
from coulomb2d.potential import make_potential

GINIBRE = make_potential("ginibre")
QUARTIC = make_potential("quartic")


def test_ginibre_norms_closed_form_and_quadrature():
    exact = np.array([np.log(float(factorial(k))) - (k + 1) * np.log(16) for k in range(16)])
    np.testing.assert_allclose(orthonormal_norms(GINIBRE, 16), exact, atol=1e-10)
    np.testing.assert_allclose(orthonormal_norms(GINIBRE, 16, method="quad"), exact, atol=1e-10)


def test_unit_norm_n1():
    assert orthonormal_norms(GINIBRE, 1, method="quad")[0] == pytest.approx(0.0, abs=1e-14)


def test_quartic_norms_against_reference_quadrature():
    n = 8
    ours = orthonormal_norms(QUARTIC, n)
    for k in range(n):
        ref = mpmath.quad(lambda s: 2 * s ** (2 * k + 1) * mpmath.exp(-n * s**4), [0, 0.5, 1, 2, mpmath.inf])
        assert np.exp(ours[k]) == pytest.approx(float(ref), rel=1e-8)


def test_rn_at_origin_equals_n():
    for n in (1, 5, 64, 300):
        assert one_point(GINIBRE, n, 0.0) == pytest.approx(n, rel=1e-13)


def test_brute_force_n4():
    n, r = 4, Fraction(1, 2)
    total = sum(Fraction(n ** (k + 1), factorial(k)) * r ** (2 * k) for k in range(n))
    expected = float(total) * np.exp(-n * 0.25)
    assert one_point(GINIBRE, n, 0.5) == pytest.approx(expected, rel=1e-14)
    assert one_point(GINIBRE, n, 0.5, method="quad") == pytest.approx(expected, rel=1e-12)


def test_bulk_value():
    assert 0.999 <= one_point(GINIBRE, 1024, 0.5) / 1024 <= 1.001


def test_n1_profile():
    r = np.linspace(0, 3, 13)
    np.testing.assert_allclose(ginibre_one_point(1, r), np.exp(-r * r), rtol=1e-13)
    assert ginibre_one_point(1, 0.0) == 1.0


def test_g100_pinned_by_direct_sum():
    with mpmath.workdps(40):
        oracle = mpmath.nsum(lambda k: mpmath.mpf(100) ** k * mpmath.exp(-100) / mpmath.factorial(k), [0, 99])
    assert ginibre_edge_value(100) == pytest.approx(float(oracle), abs=1e-13)
    assert ginibre_edge_value(100) == pytest.approx(0.4867012, abs=1e-7)


def test_route_agreement():
    r = np.linspace(0, 2, 201)
    for n in (1, 4, 16, 64):
        a, b = ginibre_one_point(n, r), one_point(GINIBRE, n, r)
        np.testing.assert_allclose(b, a, rtol=1e-8)


def test_edge_profile_monotone():
    r = np.linspace(1.0, 2.0, 200)
    vals = ginibre_one_point(256, r)
    assert np.all(np.diff(vals) <= 0)


@pytest.mark.parametrize("pot", [GINIBRE, QUARTIC], ids=["r2", "r4"])
@pytest.mark.parametrize("n", [4, 16, 64])
def test_normalization(pot, n):
    R = one_point_function(pot, n)
    assert radial_moment(R, lambda s: 1.0) == pytest.approx(n, rel=1e-6)


@pytest.mark.parametrize("n", [4, 16, 64])
def test_moment_oracle(n):
    R = one_point_function(GINIBRE, n)
    assert ginibre_moment(n, 1) == pytest.approx((n + 1) / 2, rel=1e-14)
    assert ginibre_moment(n, 2) == pytest.approx((n + 1) * (n + 2) / (3 * n), rel=1e-14)
    for m in (1, 2):
        assert radial_moment(R, lambda s: s ** (2 * m)) == pytest.approx(ginibre_moment(n, m), rel=1e-8)


def test_quadrature_moment_cross_check():
    # independent check of the radial reduction: plain quad of 2 r R_n(r)
    n = 16
    val = integrate.quad(lambda s: 2 * s * ginibre_one_point(n, s), 0, 6, limit=200)[0]
    assert val == pytest.approx(n, rel=1e-10)


def test_errors():
    with pytest.raises(DomainError):
        one_point(GINIBRE, 4, -0.1)
    with pytest.raises(DomainError):
        ginibre_one_point(0, 0.5)
    with pytest.raises(DomainError):
        orthonormal_norms(GINIBRE, 0)
