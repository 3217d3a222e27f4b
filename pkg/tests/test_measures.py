import math

import numpy as np
import pytest

from csk.errors import DomainError, SpecError
from csk.measures import CATALOG, Measure, evaluate_density, law_from_spec, support_bounds
from csk.quadrature import integrate

from conftest import CATALOG_SPECS


@pytest.mark.parametrize("spec", CATALOG_SPECS + ("mp:a=2", "mp:a=-0.5", "isc:p=2"))
def test_total_mass_is_one(spec):
    mu = law_from_spec(spec).measure
    assert integrate(lambda x: np.ones_like(x), mu) == pytest.approx(1.0, abs=1e-7)


def test_spec_examples():
    assert support_bounds(law_from_spec("semicircle")) == (2.0, 2.0, 0.5)
    assert support_bounds(law_from_spec("inverse_semicircle:p=1")) == (-0.25, 0.0, math.inf)
    A, B, tp = support_bounds(law_from_spec("free_strict_arcsine"))
    assert (A, B) == (0.75, 0.75) and tp == pytest.approx(4 / 3)
    assert law_from_spec("marchenko_pastur:a=-2").measure.atoms == ((0.5, 0.75),)
    assert law_from_spec("mp:a=0.5").measure.atoms == ()


def test_density_values():
    assert evaluate_density(law_from_spec("semicircle").measure, 0.0) == pytest.approx(1 / math.pi)
    assert evaluate_density(law_from_spec("free_abel").measure, -1.0) == pytest.approx(
        1 / (2 * math.pi))
    with pytest.raises(DomainError):
        evaluate_density(law_from_spec("bernoulli").measure, 0.0)
    with pytest.raises(DomainError):
        evaluate_density(law_from_spec("semicircle").measure, 2.0)


def test_mp_zero_is_semicircle():
    a0 = law_from_spec("mp:a=0").measure
    sc = law_from_spec("semicircle").measure
    xs = np.linspace(-1.9, 1.9, 11)
    assert np.allclose(a0.density(xs), sc.density(xs))


@pytest.mark.parametrize("bad", ["mp:a=1", "mp:a=-1", "mp", "isc:p=0", "isc:p=-2",
                                 "nope", "semicircle:a=1", "mp:a=x", "mp:a=1,a=2",
                                 "Semicircle", "mp:a="])
def test_bad_specs(bad):
    with pytest.raises(SpecError):
        law_from_spec(bad)


def test_aliases_resolve_to_same_law():
    for entry in CATALOG.values():
        for alias in entry.aliases:
            params = ":a=0.5" if entry.name == "marchenko_pastur" else ""
            assert law_from_spec(alias + params).name == entry.name


def test_measure_invariants():
    with pytest.raises(ValueError):
        Measure(None, atoms=((0.0, -0.1),))
    with pytest.raises(ValueError):
        Measure(None, atoms=((0.0, 0.5), (0.0, 0.5)))
    with pytest.raises(ValueError):
        Measure(None)


def test_reflection_and_tilting_preserve_mass():
    mu = law_from_spec("mp:a=-2").measure
    one = lambda x: np.ones_like(x)  # noqa: E731
    assert integrate(one, mu.reflected()) == pytest.approx(1.0, abs=1e-10)
    assert integrate(lambda x: x, mu.reflected()) == pytest.approx(-integrate(lambda x: x, mu))
    doubled = mu.tilted(lambda x: 2 * np.ones_like(np.asarray(x, dtype=float)), 2.0)
    assert integrate(one, doubled) == pytest.approx(2.0, abs=1e-10)
