"""Cauchy transform, the kernel transform M, the mean function k and limits.

All transforms are evaluated at real arguments.  ``method="auto"`` uses a
catalog closed form when the law has one and quadrature otherwise;
``method="quad"`` always integrates, which is what the verification suite
uses as its oracle.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, NumericalError, QuadratureError
from .measures import Law, support_bounds
from .quadrature import DEFAULT_CONFIG, integrate

INF = math.inf


@dataclass(frozen=True)
class ThetaDomain:
    """Union of open intervals on which ``M(theta)`` is finite (0 excluded)."""

    intervals: tuple

    def __contains__(self, theta):
        return any(lo < theta < hi for lo, hi in self.intervals)

    @property
    def positive(self):
        return next(iv for iv in self.intervals if iv[0] >= 0)

    @property
    def negative(self):
        """The extended branch ``(-inf, 1/A)``, or ``None`` when ``A >= 0``."""
        return next((iv for iv in self.intervals if iv[1] <= 0), None)

    def __str__(self):
        def fmt(v):
            return "inf" if v == INF else "-inf" if v == -INF else f"{v:g}"
        return " U ".join(f"({fmt(a)}, {fmt(b)})" for a, b in self.intervals)


def _measure(law):
    return law.measure if isinstance(law, Law) else law


def _closed(law, method):
    if method not in ("auto", "quad", "closed"):
        raise ValueError(f"unknown method {method!r}")
    forms = getattr(law, "closed_forms", None)
    if method == "closed" and forms is None:
        raise ValueError("law has no closed forms")
    return forms if method != "quad" else None


def theta_domain(law):
    A, B, theta_plus = support_bounds(law)
    if A >= 0:
        return ThetaDomain(((0.0, theta_plus),))
    return ThetaDomain(((-INF, 1.0 / A), (0.0, INF)))


def cauchy_transform(law, z, cfg=DEFAULT_CONFIG, method="auto"):
    """``G(z) = int nu(dx) / (z - x)`` for real ``z`` above the support.

    ``z == A`` returns ``+inf`` when an atom sits at ``A``; otherwise the
    endpoint itself is outside the domain (use :func:`cauchy_at_upper_bound`).
    """
    measure = _measure(law)
    A = measure.sup
    if not z > A:
        raise DomainError(f"G(z) needs z > sup supp = {A}; got {z}")
    forms = _closed(law, method)
    if forms is not None:
        return float(forms.cauchy_transform(float(z)))
    return integrate(lambda x: 1.0 / (z - x), measure, cfg)


def m_transform(law, theta, cfg=DEFAULT_CONFIG, method="auto"):
    """``M(theta) = int nu(dx) / (1 - theta x)``, with ``M(0) = 1``."""
    if theta == 0:
        return 1.0
    if theta not in theta_domain(law):
        raise DomainError(f"theta={theta} outside {theta_domain(law)}")
    forms = _closed(law, method)
    if forms is not None:
        return float(forms.cauchy_transform(1.0 / theta)) / theta
    return integrate(lambda x: 1.0 / (1.0 - theta * x), _measure(law), cfg)


def m_transform_derivative(law, theta, cfg=DEFAULT_CONFIG):
    """``M'(theta) = int x nu(dx) / (1 - theta x)**2`` by quadrature."""
    if theta not in theta_domain(law):
        raise DomainError(f"theta={theta} outside {theta_domain(law)}")
    return integrate(lambda x: x / (1.0 - theta * x) ** 2, _measure(law), cfg)


def mean_function(law, theta, cfg=DEFAULT_CONFIG, method="auto"):
    """``k(theta) = (M(theta) - 1) / (theta M(theta))``.

    By quadrature the numerator is integrated directly as
    ``int x nu(dx) / (1 - theta x)``, which avoids the cancellation in
    ``M - 1`` for small ``theta``.
    """
    if theta == 0 or theta not in theta_domain(law):
        raise DomainError(f"theta={theta} outside {theta_domain(law)}")
    forms = _closed(law, method)
    if forms is not None:
        M = m_transform(law, theta, cfg, method)
        return (M - 1.0) / (theta * M)
    measure = _measure(law)
    M = integrate(lambda x: 1.0 / (1.0 - theta * x), measure, cfg)
    N = integrate(lambda x: x / (1.0 - theta * x), measure, cfg)
    return N / M


def mean_function_derivative(law, theta, cfg=DEFAULT_CONFIG):
    """``k'(theta)`` from ``k = N/M`` with both derivatives by quadrature."""
    measure = _measure(law)
    M = integrate(lambda x: 1.0 / (1.0 - theta * x), measure, cfg)
    N = integrate(lambda x: x / (1.0 - theta * x), measure, cfg)
    dM = integrate(lambda x: x / (1.0 - theta * x) ** 2, measure, cfg)
    dN = integrate(lambda x: x * x / (1.0 - theta * x) ** 2, measure, cfg)
    return (dN * M - N * dM) / (M * M)


def extrapolate_limit(values, direction=1.0):
    """Limit of a sequence sampled at geometrically shrinking offsets.

    Successive differences ``d_k`` are compared: a ratio clearly below one
    means geometric convergence, and the limit is then estimated by repeated
    Aitken delta-squared passes (mixed rates such as ``h**0.5`` plus ``h``
    need more than one pass).  Otherwise the sequence is declared divergent
    and ``direction * inf`` is returned.  ``direction`` is the sign the caller
    expects for a divergent sequence.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise NumericalError("need at least three samples to extrapolate")
    d = np.diff(v)
    scale = max(1.0, float(np.abs(v).max()))
    last, prev = d[-1], d[-2]
    if abs(last) <= 1e-11 * scale:
        return float(v[-1])
    ratio = last / prev if prev != 0 else INF
    if (abs(last) > abs(prev) or ratio >= 0.9) and np.sign(last) == np.sign(direction):
        return direction * INF
    if not 0 <= ratio < 0.9:
        raise NumericalError(f"limit sequence neither converges nor diverges "
                             f"(difference ratio {ratio:.3g})", residual=abs(last))
    while v.size >= 3:
        d2 = v[2:] - 2 * v[1:-1] + v[:-2]
        if np.any(d2 == 0):
            break
        v = v[2:] - (v[2:] - v[1:-1]) ** 2 / d2
    return float(v[-1])


def sample_until_failure(func, points, minimum=3):
    """Evaluate ``func`` along ``points`` and stop at the first quadrature failure."""
    values = []
    for p in points:
        try:
            values.append(func(p))
        except QuadratureError:
            if len(values) < minimum:
                raise
            break
    return values


def cauchy_at_upper_bound(law, cfg=DEFAULT_CONFIG, method="auto"):
    """``lim_{b -> B+} G(b)``; ``+inf`` when the limit diverges.

    When ``A < 0`` the point ``B = 0`` lies strictly above the support and
    ``G(0)`` is evaluated directly.  An atom at ``B`` forces ``+inf``.
    Otherwise ``G`` is sampled at ``B + 10**-k``, ``k = 2..8``, and the
    sequence extrapolated.
    """
    measure = _measure(law)
    A, B, _ = support_bounds(law)
    if B > A:
        return cauchy_transform(law, B, cfg, method)
    if any(x == B and w > 0 for x, w in measure.atoms):
        return INF
    forms = _closed(law, method)
    if forms is not None:
        with np.errstate(all="ignore"):
            value = float(forms.cauchy_transform(float(B)))
        return value if math.isfinite(value) else INF
    offsets = [10.0 ** -k for k in range(2, 9)]
    values = sample_until_failure(
        lambda h: cauchy_transform(law, B + h, cfg, "quad"), offsets)
    return extrapolate_limit(values, direction=1.0)
