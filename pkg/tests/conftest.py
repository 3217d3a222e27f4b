import pytest

from csk.family import build_family
from csk.measures import law_from_spec

CATALOG_SPECS = ("semicircle", "mp:a=0.5", "mp:a=-2", "free_abel", "free_ressel",
                 "arcsine", "isc:p=1", "bernoulli")


@pytest.fixture(scope="session")
def families():
    """Closed-form (``auto``) and quadrature-only (``quad``) families, built once."""
    cache = {}

    def get(spec, method="auto"):
        key = (spec, method)
        if key not in cache:
            cache[key] = build_family(law_from_spec(spec), method=method)
        return cache[key]

    return get
