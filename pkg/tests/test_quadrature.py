import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sp_integrate

from csk.errors import QuadratureError
from csk.measures import Measure, law_from_spec
from csk.quadrature import QuadratureConfig, adaptive_integrate, integrate, integrate_density


def catalan(k):
    return math.comb(2 * k, k) // (k + 1)


@given(st.integers(min_value=0, max_value=8))
@settings(max_examples=20, deadline=None)
def test_semicircle_even_moments_are_catalan(k):
    sc = law_from_spec("semicircle").measure
    assert integrate(lambda x: x ** (2 * k), sc) == pytest.approx(catalan(k), rel=1e-10)


def test_second_moment_and_kernel_normalisation():
    sc = law_from_spec("semicircle").measure
    assert integrate(lambda x: x * x, sc) == pytest.approx(1.0, abs=1e-12)
    m = 0.5
    assert integrate(lambda x: 1.0 / (1 + m * (m - x)), sc) == pytest.approx(1.0, abs=1e-12)


def test_agrees_with_scipy_quad_on_heavy_tails():
    # independent oracle: QUADPACK on the original variable
    law = law_from_spec("isc:p=1")
    dens = law.measure.density
    ref, _ = sp_integrate.quad(lambda x: dens(np.array([x]))[0] / (2 - x), -np.inf, -0.25,
                               epsabs=1e-13, epsrel=1e-12, limit=500)
    assert integrate(lambda x: 1 / (2 - x), law.measure) == pytest.approx(ref, rel=1e-9)


def test_inverse_sqrt_endpoint():
    # int_0^1 x^-1/2 dx = 2 with the blow-up handled by substitution
    val = integrate_density(lambda x: np.ones_like(x), lambda x: 1 / np.sqrt(x),
                            0.0, 1.0, "inverse_sqrt", "none",
                            lower_local=lambda d: 1 / np.sqrt(d))
    assert val == pytest.approx(2.0, rel=1e-12)


def test_atoms_only():
    mu = Measure(None, atoms=((-1.0, 0.25), (2.0, 0.75)))
    assert integrate(lambda x: x, mu) == pytest.approx(1.25)


def test_full_output_reports_error():
    val, err = integrate(lambda x: x, law_from_spec("semicircle").measure, full_output=True)
    assert abs(val) < 1e-14 and 0 <= err < 1e-10


def test_budget_exhaustion_raises():
    cfg = QuadratureConfig(max_subdivisions=25)
    with pytest.raises(QuadratureError) as info:
        adaptive_integrate(lambda x: np.sin(1 / (x + 1e-3)), np.linspace(0, 1, 3), cfg)
    assert info.value.residual is not None


def test_config_validation_and_env(monkeypatch):
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=0)
    monkeypatch.setenv("CSK_QUAD_RELTOL", "1e-8")
    assert QuadratureConfig().rel_tol == 1e-8
