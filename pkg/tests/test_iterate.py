import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csk.errors import DomainError
from csk.family import build_family
from csk.iterate import (aw_integral, aw_integrand, cubic_closed_forms, iterate_family,
                         iterated_m_transform, iterated_mean, iterated_psi,
                         iterated_pseudo_variance, iterated_variance, mean_map,
                         mean_map_inverse, member_law, quadratic_closed_forms)
from csk.measures import law_from_spec
from csk.quadrature import integrate, integrate_density
from csk.transforms import mean_function


def test_iterated_domains(families):
    assert iterate_family(families("semicircle"), 0.5).domain == pytest.approx((0.5, 1.5))
    assert iterate_family(families("mp:a=0.5"), 0.5).domain == pytest.approx((0.5, 1.75))
    assert iterate_family(families("free_ressel"), -3).domain == pytest.approx((-3, -1.5))
    assert iterate_family(families("free_abel"), -1).domain == (-1, 0)


def test_mean_map_examples(families):
    it = iterate_family(families("semicircle", "quad"), 0.5)
    assert mean_map(it, 0.3) == pytest.approx(0.8, abs=1e-9)
    it = iterate_family(families("free_abel"), -1)
    assert mean_map(it, -2) == pytest.approx(-0.5, abs=1e-12)
    # limit branch: m1 - r(m1)/r'(m1); semicircle r = 1/m gives 2 m1
    it = iterate_family(families("semicircle"), 0.5)
    assert mean_map(it, 0.5) == pytest.approx(1.0)
    # inside the branch window: limit plus the first-order term
    assert mean_map(it, 0.5 + 5e-8) == pytest.approx(1.0 + 5e-8, abs=1e-12)
    assert mean_map(it, 0.5 - 5e-8) == pytest.approx(1.0 - 5e-8, abs=1e-12)
    assert mean_map(it, 0.5 + 1e-6) == pytest.approx(1.0 + 1e-6, abs=1e-9)


def test_inverse_at_image_of_m1(families):
    # mbar = mean_map(m1) sits in the branch window; semicircle v1 = 1 + m1^2 - m1 mbar
    it = iterate_family(families("semicircle"), 0.5)
    assert mean_map_inverse(it, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert iterated_variance(it, 1.0) == pytest.approx(0.75, abs=1e-12)
    # quadrature only: r'(m1) comes from a central difference of inverted values
    it = iterate_family(families("semicircle", "quad"), 0.5)
    assert mean_map_inverse(it, 1.0) == pytest.approx(0.5, abs=1e-9)
    assert iterated_variance(it, 1.0) == pytest.approx(0.75, abs=1e-9)
    it = iterate_family(families("free_abel", "quad"), -1.0)
    mbar = mean_map(it, -1.0)
    want = mbar / (mbar + 1) * (1 - mbar) * (mbar - 1)
    assert iterated_variance(it, mbar) == pytest.approx(want, rel=1e-10)


def test_limit_branch_matches_raw_formula(families):
    # (2 m1 V(m1) - m1^2 V'(m1)) / (V(m1) - m1 V'(m1)) for V = m^2 (m - 1)
    fam = families("free_abel")
    m1 = -1.0
    V, dV = m1 ** 2 * (m1 - 1), 3 * m1 ** 2 - 2 * m1
    want = (2 * m1 * V - m1 ** 2 * dV) / (V - m1 * dV)
    assert mean_map(iterate_family(fam, m1), m1) == pytest.approx(want, rel=1e-12)


def test_iterated_pv_examples(families):
    it = iterate_family(families("semicircle", "quad"), 0.5)
    assert iterated_variance(it, 0.8) == pytest.approx(0.85, abs=1e-9)
    it = iterate_family(families("free_abel", "quad"), -1)
    assert iterated_variance(it, -0.5) == pytest.approx(2.25, rel=1e-9)
    it = iterate_family(families("isc:p=1", "quad"), -2)
    assert iterated_variance(it, -1.5) == pytest.approx(15.75, rel=1e-9)
    with pytest.raises(DomainError):
        iterated_variance(it, -0.5)


def test_m1_transform_and_mean_against_quadrature(families):
    fam = families("semicircle", "quad")
    it = iterate_family(fam, 0.5)
    q = member_law(it)
    for theta in (0.1, 0.25, it.theta1, 0.45):
        direct = integrate(lambda x: 1 / (1 - theta * x), q.measure)
        assert iterated_m_transform(it, theta) == pytest.approx(direct, abs=1e-9)
        assert iterated_mean(it, theta) == pytest.approx(
            mean_function(q, theta, method="quad"), abs=1e-9)
    assert iterated_m_transform(it, 1e-9) == pytest.approx(1, abs=1e-7)
    assert iterated_mean(it, 1e-9) == pytest.approx(0.5, abs=1e-7)


def test_bernoulli_iterated_m_transform(families):
    it = iterate_family(families("bernoulli"), 0.5)
    assert it.theta1 == pytest.approx(0.5)
    M = lambda t: 1 / (1 - t * t)  # noqa: E731
    want = (0.25 * M(0.25) - 0.5 * M(0.5)) / (M(0.5) * (-0.25))
    atoms = member_law(it).measure.atoms
    direct = sum(w / (1 - 0.25 * x) for x, w in atoms)
    assert iterated_m_transform(it, 0.25) == pytest.approx(want)
    assert direct == pytest.approx(want)


def test_quadratic_closed_forms_catalog_cases():
    m1 = 0.4
    sc = quadratic_closed_forms(0, 0, m1)
    mp = quadratic_closed_forms(0.5, 0, m1)
    for mb in np.linspace(0.5, 1.3, 5):
        assert sc.v1(mb) == pytest.approx(1 + m1 ** 2 - m1 * mb)
        assert mp.v1(mb) == pytest.approx((1 + 0.5 * mb) * (1 + m1 * (0.5 + m1 - mb)) / (1 + 0.5 * m1))


def test_cubic_closed_forms_catalog_cases():
    assert cubic_closed_forms(1, -1, 0, -1).v1(-0.5) == pytest.approx(2.25)
    arc = cubic_closed_forms(1, 0, 1, -1)
    for mb in (-0.8, -0.2, 0.2):
        assert arc.v1(mb) == pytest.approx((1 + mb ** 2) * (1 - 1 + 1 - mb) / (mb + 1))
    with pytest.raises(DomainError):
        cubic_closed_forms(0, 1, 1, -1)


@given(st.floats(-0.9, 0.9), st.floats(0.05, 0.95))
@settings(max_examples=40, deadline=None)
def test_quadratic_maps_are_inverse(m1_frac, u):
    a, b = 0.5, 0.0
    m1 = 0.5 + 0.45 * m1_frac  # inside (0, 1)
    cf = quadratic_closed_forms(a, b, m1)
    m = u
    assert cf.m_of_mbar(cf.mbar_of_m(m)) == pytest.approx(m, rel=1e-12, abs=1e-12)


@given(st.floats(0.05, 0.95))
@settings(max_examples=20, deadline=None)
def test_mean_map_inverse_roundtrip(u):
    it = iterate_family(build_family(law_from_spec("arcsine")), -1.0)
    lo, hi = it.domain
    mbar = lo + u * (hi - lo)
    m = mean_map_inverse(it, mbar)
    assert mean_map(it, m) == pytest.approx(mbar, abs=1e-10)


def test_psi_preserved(families):
    fam = families("mp:a=0.5", "quad")
    it = iterate_family(fam, 0.5)
    for m in (0.1, 0.4, 0.8):
        assert iterated_psi(it, mean_map(it, m)) == pytest.approx(fam.psi(m), abs=1e-9)


def test_mean_map_increasing(families):
    it = iterate_family(families("free_ressel"), -3)
    vals = [mean_map(it, m) for m in np.linspace(-20, -2.01, 60)]
    assert np.all(np.diff(vals) > 0)


def test_aw_examples():
    assert aw_integral(0, 0, 0, 0.5) == pytest.approx(2 * math.pi)
    assert aw_integral(0, 0, 0.3, 0.6) == pytest.approx(2 * math.pi / (1 - 0.18))
    a = (0.1, 0.2, 0.3, 0.4)
    quad = integrate_density(aw_integrand(*a), np.ones_like, -2, 2, "sqrt", "sqrt")
    assert aw_integral(*a) == pytest.approx(quad, abs=1e-9)
    with pytest.raises(DomainError):
        aw_integral(0, 0, 0, 1.0)


@given(st.tuples(*[st.floats(-0.95, 0.95)] * 4))
@settings(max_examples=30, deadline=None)
def test_aw_symmetric_and_positive(a):
    base = aw_integral(*a)
    assert base > 0
    for perm in list(permutations(a))[:6]:
        assert aw_integral(*perm) == pytest.approx(base, rel=1e-12)
