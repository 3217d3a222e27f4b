import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csk.errors import DomainError
from csk.family import (build_family, member, pseudo_variance, theta_tilted,
                        two_sided_domain, variance, z_of_m)
from csk.measures import Law, Measure, law_from_spec
from csk.quadrature import integrate
from csk.transforms import cauchy_transform

from conftest import CATALOG_SPECS

ONE = lambda x: np.ones_like(x)  # noqa: E731


@pytest.mark.parametrize("spec,domain", [
    ("semicircle", (0, 1)), ("mp:a=0.5", (0, 1)), ("free_abel", (-math.inf, 0)),
    ("free_ressel", (-math.inf, -2)), ("arcsine", (-math.inf, -0.5)),
    ("isc:p=1", (-math.inf, -1)), ("bernoulli", (0, 1)), ("mp:a=-2", (0, 0.5))])
def test_numeric_domain_of_means(families, spec, domain):
    fam = families(spec, "quad")
    for got, want in zip(fam.domain, domain):
        assert got == want if math.isinf(want) else got == pytest.approx(want, abs=1e-6)


def test_bernoulli_two_sided():
    lo, hi = two_sided_domain(law_from_spec("bernoulli"))
    assert (lo, hi) == pytest.approx((-1, 1), abs=1e-9)


def test_pseudo_variance_examples(families):
    assert pseudo_variance(families("semicircle", "quad"), 0.5) == pytest.approx(1, abs=1e-9)
    assert pseudo_variance(families("free_abel", "quad"), -2) == pytest.approx(-12, rel=1e-9)
    isc2 = build_family(law_from_spec("isc:p=2"), method="quad")
    assert pseudo_variance(isc2, -5) == pytest.approx(-31.25, rel=1e-9)
    with pytest.raises(DomainError):
        pseudo_variance(families("semicircle"), 1.5)


def test_zero_is_not_an_interior_mean_of_centered_laws():
    sc = build_family(law_from_spec("semicircle"), method="quad")
    with pytest.raises(DomainError):
        pseudo_variance(sc, 0.0)


def test_variance_examples(families):
    assert variance(families("semicircle", "quad"), 0.3) == pytest.approx(1, abs=1e-9)
    assert variance(families("bernoulli", "quad"), 0.6) == pytest.approx(0.64, abs=1e-9)
    with pytest.raises(DomainError, match="undefined"):
        variance(families("free_abel"), -1)


def test_member_examples(families):
    q = member(families("semicircle", "quad"), 0.5)
    xs = np.linspace(-1.9, 1.9, 9)
    want = np.sqrt(4 - xs ** 2) / (2 * np.pi * (1.25 - 0.5 * xs))
    assert np.allclose(q.density(xs), want, atol=1e-10)
    q = member(families("free_abel", "quad"), -1)
    xs = -np.geomspace(1e-3, 1e3, 9)
    want = 2 / (np.pi * (1 - xs) ** 2 * np.sqrt(-xs))
    assert np.allclose(q.density(xs), want, rtol=1e-9)
    q = member(families("bernoulli", "quad"), 0.5)
    assert dict(q.atoms) == pytest.approx({-1.0: 0.25, 1.0: 0.75})


def test_z_of_m_examples(families):
    assert z_of_m(families("semicircle", "quad"), 0.5) == pytest.approx(2.5, abs=1e-9)
    assert z_of_m(families("arcsine", "quad"), -1) == pytest.approx(1, abs=1e-9)
    isc = families("isc:p=1", "quad")
    assert z_of_m(isc, -2) == pytest.approx(2, abs=1e-9)
    assert cauchy_transform(isc.law, 2.0, method="quad") == pytest.approx(0.25, rel=1e-10)


def test_member_at_zero_uses_slope():
    # shift MP(0.5) left by 0.3 so that 0 becomes an interior mean
    base = law_from_spec("mp:a=0.5").measure
    moved = Measure(lambda x: base.density(np.asarray(x) + 0.3), base.lower - 0.3,
                    base.upper - 0.3, base.lower_tag, base.upper_tag)
    fam = build_family(Law.from_measure(moved), method="quad")
    assert fam.m0 == pytest.approx(-0.3, abs=1e-9) and fam.contains(0.0)
    q0 = member(fam, 0.0)
    assert integrate(ONE, q0) == pytest.approx(1, abs=1e-8)
    assert integrate(lambda x: x, q0) == pytest.approx(0, abs=1e-8)
    assert pseudo_variance(fam, 0.0) == 0.0
    # shifting a law shifts its family: v(m) = 1 + 0.5 (m + 0.3), so at m = 0
    # V(m)/m = v(m)/(m - m0) takes the value 1.15/0.3, which is V'(0) = 1/psi(0)
    assert fam.pv_over_m(0.0) == pytest.approx(1.15 / 0.3, rel=1e-8)
    assert 1 / fam.psi(0.0) == pytest.approx(1.15 / 0.3, rel=1e-8)


@pytest.mark.parametrize("spec", CATALOG_SPECS)
def test_member_matches_theta_tilt(families, spec):
    fam = families(spec, "quad")
    theta = 0.5 * min(fam.theta_plus, 2.0)
    q, p = member(fam, fam.k(theta)), theta_tilted(fam, theta)
    if fam.law.measure.density is not None:
        xs = np.linspace(max(fam.law.measure.lower, -20), fam.law.measure.upper, 30)[1:-1]
        assert np.allclose(q.density(xs), p.density(xs), atol=1e-8, rtol=0)
    for (_, w1), (_, w2) in zip(q.atoms, p.atoms):
        assert w1 == pytest.approx(w2, abs=1e-8)


@given(st.floats(0.02, 0.98))
@settings(max_examples=20, deadline=None)
def test_member_contracts_mp(u):
    fam = build_family(law_from_spec("mp:a=0.5"), method="quad")
    m = u * fam.m_plus
    q = member(fam, m)
    assert integrate(ONE, q) == pytest.approx(1, abs=1e-7)
    assert integrate(lambda x: x, q) == pytest.approx(m, abs=1e-7)
    assert integrate(lambda x: (x - m) ** 2, q) == pytest.approx(variance(fam, m), abs=1e-6)


@given(st.floats(0.05, 0.45))
@settings(max_examples=20, deadline=None)
def test_psi_inverts_k(theta):
    fam = build_family(law_from_spec("semicircle"), method="quad")
    assert fam.psi(fam.k(theta)) == pytest.approx(theta, abs=1e-9)


def test_pseudo_variance_function_provenance(families):
    assert families("semicircle").pseudo_variance_function().provenance == "closed_form"
    pv = families("semicircle", "quad").pseudo_variance_function()
    assert pv.provenance == "inverted" and pv(0.5) == pytest.approx(1)
