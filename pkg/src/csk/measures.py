"""Measures, the built-in law catalog and the law spec parser.

A :class:`Measure` is an optional density on an interval (with endpoint
singularity tags used by the quadrature engine) plus a finite list of atoms.
A :class:`Law` attaches a name, parameters and, for catalog laws, a
:class:`ClosedForms` record.
"""

from dataclasses import dataclass, field, replace
import math
import re
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, SpecError
from .quadrature import SINGULARITY_TAGS

INF = math.inf


@dataclass(frozen=True)
class Measure:
    """Absolutely continuous density on ``(lower, upper)`` plus atoms.

    ``density`` must accept and return float ndarrays.  It may be ``None``
    for purely atomic measures.  ``atoms`` is a tuple of
    ``(location, weight)`` pairs.  ``lower_local(d)`` / ``upper_local(d)``
    optionally give the density at distance ``d`` from a finite endpoint,
    which keeps the quadrature accurate right at singular endpoints.
    """

    density: Optional[Callable] = None
    lower: float = -INF
    upper: float = INF
    lower_tag: str = "none"
    upper_tag: str = "none"
    atoms: tuple = ()
    total_mass_hint: float = 1.0
    lower_local: Optional[Callable] = None
    upper_local: Optional[Callable] = None

    def __post_init__(self):
        atoms = tuple((float(x), float(w)) for x, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if any(w < 0 for _, w in atoms):
            raise ValueError("atom weights must be non-negative")
        locations = [x for x, _ in atoms]
        if len(set(locations)) != len(locations):
            raise ValueError("atom locations must be distinct")
        if self.density is None and not atoms:
            raise ValueError("a measure needs a density or at least one atom")
        if self.density is not None and not self.lower < self.upper:
            raise ValueError("empty a.c. support")
        for tag in (self.lower_tag, self.upper_tag):
            if tag not in SINGULARITY_TAGS:
                raise ValueError(f"unknown singularity tag {tag!r}")

    @property
    def sup(self):
        """Supremum of the support (a.c. part and atoms)."""
        candidates = [x for x, _ in self.atoms]
        if self.density is not None:
            candidates.append(self.upper)
        return max(candidates)

    @property
    def inf(self):
        candidates = [x for x, _ in self.atoms]
        if self.density is not None:
            candidates.append(self.lower)
        return min(candidates)

    def tilted(self, kernel, total_mass_hint=1.0):
        """Return ``kernel(x) * self(dx)``; atoms are reweighted by the kernel."""
        changes = {"total_mass_hint": total_mass_hint}
        if self.density is not None:
            base = self.density
            changes["density"] = lambda x: kernel(x) * base(x)
            lo, hi = self.lower, self.upper
            if self.lower_local is not None:
                lo_local = self.lower_local
                changes["lower_local"] = lambda d: kernel(lo + d) * lo_local(d)
            if self.upper_local is not None:
                hi_local = self.upper_local
                changes["upper_local"] = lambda d: kernel(hi - d) * hi_local(d)
        changes["atoms"] = tuple(
            (x, float(w * kernel(np.array([x]))[0])) for x, w in self.atoms)
        return replace(self, **changes)

    def with_atom(self, location, weight):
        """Add ``weight`` at ``location`` (merged if an atom is already there)."""
        atoms = dict(self.atoms)
        atoms[float(location)] = atoms.get(float(location), 0.0) + float(weight)
        return replace(self, atoms=tuple(sorted(atoms.items())))

    def reflected(self):
        """Image of the measure under ``x -> -x``."""
        density = None
        if self.density is not None:
            base = self.density

            def density(x):
                return base(-x)
        atoms = tuple(sorted((-x, w) for x, w in self.atoms))
        return Measure(density, -self.upper, -self.lower, self.upper_tag,
                       self.lower_tag, atoms, self.total_mass_hint,
                       lower_local=self.upper_local, upper_local=self.lower_local)


@dataclass(frozen=True)
class ClosedForms:
    """Analytic quantities known for a catalog law.

    ``pv_over_m`` is the analytic continuation of ``V(m)/m`` to every real
    ``m`` where the formula makes sense; ``cauchy_transform`` is valid for
    real ``z > sup supp``.
    """

    cauchy_transform: Callable
    pv_over_m: Callable
    pv_derivative: Callable
    m0: float
    m_plus: float
    quadratic: Optional[tuple] = None
    cubic: Optional[tuple] = None

    def pseudo_variance(self, m):
        return m * self.pv_over_m(m)

    def variance(self, m):
        if math.isinf(self.m0):
            raise DomainError("variance undefined: the base law has no mean")
        return (m - self.m0) * self.pv_over_m(m)


@dataclass(frozen=True)
class Law:
    name: str
    measure: Measure
    parameters: dict = field(default_factory=dict)
    closed_forms: Optional[ClosedForms] = None

    @property
    def spec(self):
        if not self.parameters:
            return self.name
        args = ",".join(f"{k}={v:g}" for k, v in sorted(self.parameters.items()))
        return f"{self.name}:{args}"

    @classmethod
    def from_measure(cls, measure, name="custom"):
        """Wrap a bare measure (no closed forms) so it can generate a family."""
        return cls(name=name, measure=measure)


# ---------------------------------------------------------------------------
# catalog


def _semicircle():
    def density(x):
        return np.sqrt(np.maximum(4.0 - x * x, 0.0)) / (2 * np.pi)

    def cauchy(z):
        return (z - np.sqrt(z * z - 4.0)) / 2.0

    closed = ClosedForms(
        cauchy_transform=cauchy,
        pv_over_m=lambda m: 1.0 / m,
        pv_derivative=lambda m: 0.0 * m,
        m0=0.0, m_plus=1.0, quadratic=(0.0, 0.0))
    def local(d):
        return np.sqrt(d * (4.0 - d)) / (2 * np.pi)

    measure = Measure(density, -2.0, 2.0, "sqrt", "sqrt",
                      lower_local=local, upper_local=local)
    return Law("semicircle", measure, {}, closed)


def _marchenko_pastur(a):
    if a == 0:
        return _semicircle()

    def density(x):
        return (np.sqrt(np.maximum(4.0 - (x - a) ** 2, 0.0))
                / (2 * np.pi * (1.0 + a * x)))

    def cauchy(z):
        m = ((z - a) - np.sqrt((z - a) ** 2 - 4.0)) / 2.0
        return m / (1.0 + a * m)

    atoms = ((-1.0 / a, 1.0 - 1.0 / a ** 2),) if a * a > 1 else ()
    m_plus = -1.0 / a if a < -1 else 1.0
    closed = ClosedForms(
        cauchy_transform=cauchy,
        pv_over_m=lambda m: (1.0 + a * m) / m,
        pv_derivative=lambda m: a + 0.0 * m,
        m0=0.0, m_plus=m_plus, quadratic=(a, 0.0))
    def lower_local(d):
        return np.sqrt(d * (4.0 - d)) / (2 * np.pi * (1.0 + a * (a - 2.0 + d)))

    def upper_local(d):
        return np.sqrt(d * (4.0 - d)) / (2 * np.pi * (1.0 + a * (a + 2.0 - d)))

    measure = Measure(density, a - 2.0, a + 2.0, "sqrt", "sqrt", atoms,
                      lower_local=lower_local, upper_local=upper_local)
    return Law("marchenko_pastur", measure, {"a": a}, closed)


def _free_abel():
    def density(x):
        return 1.0 / (np.pi * (1.0 - x) * np.sqrt(-x))

    closed = ClosedForms(
        cauchy_transform=lambda z: 1.0 / (z + np.sqrt(z)),
        pv_over_m=lambda m: m * (m - 1.0),
        pv_derivative=lambda m: 3 * m * m - 2 * m,
        m0=-INF, m_plus=0.0, cubic=(1.0, -1.0, 0.0))
    measure = Measure(density, -INF, 0.0, "none", "inverse_sqrt",
                      upper_local=lambda d: 1.0 / (np.pi * (1.0 + d) * np.sqrt(d)))
    return Law("free_abel", measure, {}, closed)


def _free_ressel():
    def density(x):
        return -1.0 / (np.pi * x * np.sqrt(-1.0 - x))

    def cauchy(z):
        m = -1.0 - np.sqrt(1.0 + z)
        return 1.0 / (m * (m + 1.0))

    closed = ClosedForms(
        cauchy_transform=cauchy,
        pv_over_m=lambda m: m * (m + 1.0),
        pv_derivative=lambda m: 3 * m * m + 2 * m,
        m0=-INF, m_plus=-2.0, cubic=(1.0, 1.0, 0.0))
    measure = Measure(density, -INF, -1.0, "none", "inverse_sqrt",
                      upper_local=lambda d: 1.0 / (np.pi * (1.0 + d) * np.sqrt(d)))
    return Law("free_ressel", measure, {}, closed)


def _free_strict_arcsine():
    def density(x):
        return np.sqrt(np.maximum(3.0 - 4.0 * x, 0.0)) / (2 * np.pi * (1.0 + x * x))

    def cauchy(z):
        m = (-1.0 - np.sqrt(4.0 * z - 3.0)) / 2.0
        return 1.0 / (1.0 + m * m)

    closed = ClosedForms(
        cauchy_transform=cauchy,
        pv_over_m=lambda m: 1.0 + m * m,
        pv_derivative=lambda m: 1.0 + 3 * m * m,
        m0=-INF, m_plus=-0.5, cubic=(1.0, 0.0, 1.0))
    def local(d):
        x = 0.75 - d
        return np.sqrt(4.0 * d) / (2 * np.pi * (1.0 + x * x))

    measure = Measure(density, -INF, 0.75, "none", "sqrt", upper_local=local)
    return Law("free_strict_arcsine", measure, {}, closed)


def _inverse_semicircle(p):
    p2 = p * p

    def density(x):
        return p * np.sqrt(np.maximum(-p2 - 4.0 * x, 0.0)) / (2 * np.pi * x * x)

    def cauchy(z):
        m = p2 * (-1.0 - np.sqrt(1.0 + 4.0 * z / p2)) / 2.0
        return p2 / (m * m)

    closed = ClosedForms(
        cauchy_transform=cauchy,
        pv_over_m=lambda m: m * m / p2,
        pv_derivative=lambda m: 3 * m * m / p2,
        m0=-INF, m_plus=-p2, cubic=(1.0 / p2, 0.0, 0.0))
    def local(d):
        x = -p2 / 4.0 - d
        return p * np.sqrt(4.0 * d) / (2 * np.pi * x * x)

    measure = Measure(density, -INF, -p2 / 4.0, "none", "sqrt", upper_local=local)
    return Law("inverse_semicircle", measure, {"p": p}, closed)


def _bernoulli():
    closed = ClosedForms(
        cauchy_transform=lambda z: z / (z * z - 1.0),
        pv_over_m=lambda m: (1.0 - m * m) / m,
        pv_derivative=lambda m: -2.0 * m,
        m0=0.0, m_plus=1.0, quadratic=(0.0, -1.0))
    measure = Measure(None, atoms=((-1.0, 0.5), (1.0, 0.5)))
    return Law("bernoulli_symmetric", measure, {}, closed)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    aliases: tuple
    parameters: dict  # name -> (default or None, human readable range)
    builder: Callable
    atoms: str  # when the law carries atoms
    summary: str


def _check_mp(params):
    a = params["a"]
    if abs(a) == 1.0:
        raise SpecError("marchenko_pastur requires a != +-1")


def _check_isc(params):
    if not params["p"] > 0:
        raise SpecError("inverse_semicircle requires p > 0")


CATALOG = {
    "semicircle": CatalogEntry(
        "semicircle", (), {}, lambda: _semicircle(), "never",
        "sqrt(4-x^2)/(2 pi) on (-2,2); V(m)=1"),
    "marchenko_pastur": CatalogEntry(
        "marchenko_pastur", ("mp",), {"a": (None, "a real, |a| != 1")},
        _marchenko_pastur, "a^2 > 1",
        "sqrt(4-(x-a)^2)/(2 pi (1+ax)) on (a-2,a+2) + (1-1/a^2) at -1/a; V(m)=1+am"),
    "free_abel": CatalogEntry(
        "free_abel", (), {}, lambda: _free_abel(), "never",
        "1/(pi (1-x) sqrt(-x)) on (-inf,0); V(m)=m^2(m-1)"),
    "free_ressel": CatalogEntry(
        "free_ressel", (), {}, lambda: _free_ressel(), "never",
        "-1/(pi x sqrt(-1-x)) on (-inf,-1); V(m)=m^2(m+1)"),
    "free_strict_arcsine": CatalogEntry(
        "free_strict_arcsine", ("arcsine",), {}, lambda: _free_strict_arcsine(),
        "never", "sqrt(3-4x)/(2 pi (1+x^2)) on (-inf,3/4); V(m)=m(1+m^2)"),
    "inverse_semicircle": CatalogEntry(
        "inverse_semicircle", ("isc",), {"p": (1.0, "p > 0")},
        _inverse_semicircle, "never",
        "p sqrt(-p^2-4x)/(2 pi x^2) on (-inf,-p^2/4); V(m)=m^3/p^2"),
    "bernoulli_symmetric": CatalogEntry(
        "bernoulli_symmetric", ("bernoulli",), {}, lambda: _bernoulli(),
        "always", "(delta_-1 + delta_1)/2; V(m)=1-m^2"),
}

_ALIASES = {alias: entry.name for entry in CATALOG.values()
            for alias in (entry.name, *entry.aliases)}
_CHECKS = {"marchenko_pastur": _check_mp, "inverse_semicircle": _check_isc}

_SPEC_RE = re.compile(
    r"^(?P<name>[a-z_]+)"
    r"(?::(?P<args>[a-z_]+=[^,=:]+(?:,[a-z_]+=[^,=:]+)*))?$")


def law_from_spec(spec):
    """Parse ``name[:key=value[,key=value]*]`` into a catalog :class:`Law`.

    >>> law_from_spec("mp:a=-2").measure.atoms
    ((0.5, 0.75),)
    """
    match = _SPEC_RE.match(spec.strip())
    if match is None:
        raise SpecError(f"malformed law spec {spec!r}")
    name = match["name"]
    if name not in _ALIASES:
        raise SpecError(f"unknown law {name!r}")
    entry = CATALOG[_ALIASES[name]]
    params = {}
    if match["args"]:
        for item in match["args"].split(","):
            key, raw = item.split("=")
            if key not in entry.parameters:
                raise SpecError(f"law {entry.name} has no parameter {key!r}")
            if key in params:
                raise SpecError(f"parameter {key!r} given twice")
            try:
                value = float(raw)
            except ValueError:
                raise SpecError(f"parameter {key}={raw!r} is not a number") from None
            if not math.isfinite(value):
                raise SpecError(f"parameter {key} must be finite")
            params[key] = value
    for key, (default, _) in entry.parameters.items():
        if key not in params:
            if default is None:
                raise SpecError(f"law {entry.name} requires parameter {key!r}")
            params[key] = default
    if entry.name in _CHECKS:
        _CHECKS[entry.name](params)
    return entry.builder(**params)


def support_bounds(law):
    """Return ``(A, B, theta_plus)`` with ``B = max(0, A)`` and ``theta_plus = 1/B``."""
    measure = law.measure if isinstance(law, Law) else law
    A = float(measure.sup)
    B = max(0.0, A)
    theta_plus = INF if B == 0 else 1.0 / B
    return A, B, theta_plus


def evaluate_density(measure, x):
    """Density at a single point strictly inside the a.c. support."""
    if isinstance(measure, Law):
        measure = measure.measure
    if measure.density is None:
        raise DomainError("measure is purely atomic; it has no density")
    if not measure.lower < x < measure.upper:
        raise DomainError(
            f"x={x} outside the a.c. support ({measure.lower}, {measure.upper})")
    return float(measure.density(np.array([float(x)]))[0])
