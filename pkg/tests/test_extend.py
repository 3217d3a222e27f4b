import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csk.errors import DomainError, NoExtensionError
from csk.extend import (atom_weight, branch_limit, branch_mean, companion_mean_map,
                        extend_family, extended_member, extended_pseudo_variance,
                        first_extension_bound, first_extension_bounds, free_power_bound,
                        psi_ext, second_extension_bound)
from csk.family import build_family
from csk.measures import law_from_spec
from csk.quadrature import integrate

ONE = np.ones_like


@pytest.mark.parametrize("spec,bold_m", [
    ("semicircle", 1.0), ("mp:a=0.5", 1.0), ("arcsine", -0.5), ("isc:p=1", -0.5),
    ("free_ressel", -1.0), ("bernoulli", 1.0), ("free_abel", 0.0), ("mp:a=-2", 0.5)])
def test_first_extension_bound(families, spec, bold_m):
    assert first_extension_bound(families(spec)) == pytest.approx(bold_m, abs=1e-9)


@pytest.mark.parametrize("spec", ["isc:p=1", "free_ressel"])
def test_h_root_and_theta_limit_agree(families, spec):
    from_h, from_theta = first_extension_bounds(families(spec, "quad"))
    assert from_h == pytest.approx(from_theta, abs=1e-6)


@pytest.mark.parametrize("spec,bold_M", [
    ("semicircle", math.inf), ("bernoulli", 1.0), ("isc:p=1", math.inf),
    ("mp:a=0.5", math.inf), ("mp:a=-2", 0.5), ("free_ressel", -1.0), ("arcsine", math.inf)])
def test_second_extension_bound(families, spec, bold_M):
    got = second_extension_bound(families(spec))
    assert got == bold_M if math.isinf(bold_M) else got == pytest.approx(bold_M, abs=1e-12)


def test_negative_branch(families):
    fam = families("isc:p=1", "quad")
    ks = [branch_mean(fam, t) for t in -np.geomspace(1e4, 4.0001, 40)]
    assert np.all(np.diff(ks) > 0)
    assert branch_mean(fam, -1e7) == pytest.approx(fam.m_plus, abs=1e-5)
    assert branch_limit(fam) == pytest.approx(-0.5, abs=1e-6)
    m = -0.75
    theta = psi_ext(fam, m)
    assert branch_mean(fam, theta) == pytest.approx(m, abs=1e-10)
    assert 1 / theta - m == pytest.approx(m * m, rel=1e-8)  # V/m = m^2
    with pytest.raises(DomainError):
        psi_ext(families("semicircle"), 0.5)


def test_atom_weight_examples(families):
    sc, isc = families("semicircle"), families("isc:p=1")
    assert atom_weight(sc, 2.0) == pytest.approx(0.75)
    assert atom_weight(isc, -0.25) == pytest.approx(0.5 / 0.5625)
    for m in (0.2, 0.7):
        assert atom_weight(sc, m) == 0.0


def test_extended_member_examples(families):
    sc, isc = families("semicircle"), families("isc:p=1")
    q = extended_member(sc, 2.0)
    assert q.atom_location == pytest.approx(2.5) and q.atom_weight == pytest.approx(0.75)
    assert integrate(lambda x: (x - 2) ** 2, q.measure) == pytest.approx(1, abs=1e-9)
    q = extended_member(isc, -0.75)
    assert q.atom_weight == 0 and integrate(ONE, q.ac_part) == pytest.approx(1, abs=1e-9)
    q = extended_member(isc, 0.5)
    assert integrate(ONE, q.ac_part) == pytest.approx(1 / 9, abs=1e-9)
    assert (q.atom_location, q.atom_weight) == pytest.approx((0.75, 8 / 9))
    with pytest.raises(DomainError):
        extended_member(families("bernoulli"), 1.2)


@given(st.floats(-0.45, 3.0))
@settings(max_examples=25, deadline=None)
def test_isc_analytic_oracle(m):
    isc = build_family(law_from_spec("isc:p=1"))
    q = extended_member(isc, m)
    assert integrate(ONE, q.ac_part) == pytest.approx(m * m / (1 + m) ** 2, abs=1e-7)
    assert integrate(lambda x: x, q.ac_part) == pytest.approx(-m * m / (1 + m), abs=1e-7)
    assert q.atom_weight == pytest.approx(max(1 + 2 * m, 0) / (1 + m) ** 2, abs=1e-7)


def test_extended_pseudo_variance(families):
    assert extended_pseudo_variance(extend_family(families("semicircle")), 2.0) == pytest.approx(
        1.0, abs=1e-9)
    isc = extend_family(families("isc:p=1"))
    assert extended_pseudo_variance(isc, 0.5) == pytest.approx(0.125, abs=1e-9)
    with pytest.raises(NoExtensionError):
        extended_pseudo_variance(extend_family(families("bernoulli")), 1.2)


@pytest.mark.parametrize("spec,ms,g", [
    ("semicircle", (0.2, 0.5, 0.8), lambda m: 1 / m),
    ("arcsine", (-3.0, -2.0), lambda m: -m - 1),
    ("free_ressel", (-4.0, -3.0), lambda m: -m - 2)])
def test_companion_closed_forms(families, spec, ms, g):
    ext = extend_family(families(spec))
    for m in ms:
        assert companion_mean_map(ext, m) == pytest.approx(g(m), abs=1e-8)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
@settings(max_examples=30, deadline=None)
def test_companion_decreasing_and_preserves_h(u, w):
    ext = extend_family(build_family(law_from_spec("mp:a=0.5")))
    m, m2 = sorted((u, w))
    if m2 - m < 1e-6:
        return
    g, g2 = companion_mean_map(ext, m), companion_mean_map(ext, m2)
    assert g > g2
    assert ext.h(g) == pytest.approx(ext.h(m), rel=1e-9)


@pytest.mark.parametrize("alpha", [1.5, 2.0, 4.0])
def test_free_power_scaling(families, alpha):
    assert free_power_bound(families("bernoulli"), alpha) == pytest.approx(alpha, abs=1e-8)
    assert free_power_bound(families("semicircle"), alpha) == math.inf
    assert free_power_bound(families("isc:p=1"), alpha) == math.inf
    with pytest.raises(DomainError):
        free_power_bound(families("bernoulli"), 0.5)
