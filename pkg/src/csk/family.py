"""The CSK family generated by a law: domain of means, psi, V, v and members.

:func:`build_family` computes the one-sided domain of means ``(m0, m_plus)``
from the limits of the mean function ``k`` at ``0+`` and of the Cauchy
transform at ``B+``.  The inverse ``psi`` of ``k`` is found by bracketing
the sign change of ``int (x - m) / (1 - theta x) nu(dx)``, which has the
sign of ``k(theta) - m`` and costs a single quadrature per step.
"""

from dataclasses import dataclass
import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalError
from .measures import Law, support_bounds
from .quadrature import DEFAULT_CONFIG, integrate
from .transforms import (cauchy_at_upper_bound, extrapolate_limit,
                         mean_function, sample_until_failure)

INF = math.inf


@dataclass(frozen=True)
class PseudoVariance:
    """``m -> V(m)`` together with where it came from."""

    eval: Callable
    provenance: str  # "closed_form" or "inverted"
    valid_interval: tuple

    def __call__(self, m):
        return self.eval(m)


@dataclass(frozen=True)
class CskFamily:
    law: Law
    m0: float
    m_plus: float
    theta_plus: float
    A: float
    B: float
    cauchy_at_B: float
    method: str = "auto"
    cfg: object = DEFAULT_CONFIG

    @property
    def closed_forms(self):
        return self.law.closed_forms if self.method == "auto" else None

    @property
    def domain(self):
        return (self.m0, self.m_plus)

    def contains(self, m):
        return self.m0 < m < self.m_plus

    def k(self, theta):
        return mean_function(self.law, theta, self.cfg, self.method)

    def psi(self, m):
        """Inverse of ``k`` on ``(0, theta_plus)``."""
        self._require_mean(m)
        return _invert_mean(self.law.measure, m, self.theta_plus, self.cfg)

    def _require_mean(self, m):
        if not self.contains(m):
            raise DomainError(f"m={m} outside the domain of means "
                              f"({self.m0}, {self.m_plus})")

    def pv_over_m(self, m):
        """``V(m)/m``; at ``m = 0`` this is the assigned value ``1/psi(0)``."""
        self._require_mean(m)
        if self.closed_forms is not None and m != 0:
            return float(self.closed_forms.pv_over_m(m))
        return 1.0 / self.psi(m) - m

    def inverted_pv_over_m(self, m):
        """``V(m)/m = 1/psi(m) - m`` by numerical inversion, ignoring closed forms."""
        self._require_mean(m)
        return 1.0 / self.psi(m) - m

    def pseudo_variance_function(self):
        provenance = "closed_form" if self.closed_forms is not None else "inverted"
        return PseudoVariance(lambda m: pseudo_variance(self, m), provenance,
                              self.domain)


def _invert_mean(measure, m, theta_plus, cfg):
    def sign_fn(theta):
        return integrate(lambda x: (x - m) / (1.0 - theta * x), measure, cfg)

    # Upper bracket: approach theta_plus (or grow towards infinity).
    hi = None
    candidates = ([theta_plus * (1 - 10.0 ** -j) for j in range(1, 16)]
                  if math.isfinite(theta_plus)
                  else [2.0 ** j for j in range(0, 60)])
    for cand in candidates:
        if sign_fn(cand) > 0:
            hi = cand
            break
    if hi is None:
        raise NumericalError(f"could not bracket psi({m}) from above")
    lo = None
    start = min(hi, 1.0) if not math.isfinite(theta_plus) else theta_plus
    for j in range(1, 40):
        cand = start * 0.5 ** j
        if cand < hi and sign_fn(cand) < 0:
            lo = cand
            break
    if lo is None:
        raise NumericalError(f"could not bracket psi({m}) from below")
    return brentq(sign_fn, lo, hi, xtol=1e-15 * hi, rtol=1e-14, maxiter=200)


def _lower_mean_endpoint(law, theta_plus, cfg):
    measure = law.measure
    if math.isfinite(measure.inf):
        return integrate(lambda x: x, measure, cfg)
    scale = min(1.0, 0.5 * theta_plus)
    thetas = [scale * 10.0 ** -k for k in range(2, 9)]
    values = sample_until_failure(
        lambda t: mean_function(law, t, cfg, "quad"), thetas)
    limit = extrapolate_limit(values, direction=-1.0)
    if math.isinf(limit):
        return -INF
    try:
        # Limit exists: the first moment converges, so integrate it outright.
        return integrate(lambda x: x, measure, cfg)
    except NumericalError:
        return limit


def build_family(law, cfg=DEFAULT_CONFIG, method="auto"):
    """Build the CSK family of ``law``.

    Parameters
    ----------
    law : Law or Measure
    cfg : QuadratureConfig
    method : {"auto", "quad"}
        ``"auto"`` takes the domain of means and ``V`` from the catalog
        closed forms when present; ``"quad"`` computes everything
        numerically.
    """
    if not isinstance(law, Law):
        law = Law.from_measure(law)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if not math.isfinite(law.measure.sup):
        raise DomainError("support must be bounded from above")
    A, B, theta_plus = support_bounds(law)
    g_B = cauchy_at_upper_bound(law, cfg, method)
    forms = law.closed_forms if method == "auto" else None
    if forms is not None:
        m0, m_plus = forms.m0, forms.m_plus
    else:
        m0 = _lower_mean_endpoint(law, theta_plus, cfg)
        m_plus = B - (0.0 if math.isinf(g_B) else 1.0 / g_B)
    if not m0 < m_plus:
        raise NumericalError(f"degenerate domain of means ({m0}, {m_plus})")
    return CskFamily(law, m0, m_plus, theta_plus, A, B, g_B, method, cfg)


def two_sided_domain(law, cfg=DEFAULT_CONFIG, method="quad"):
    """``(m_minus, m_plus)`` for a law with support bounded on both sides.

    The lower endpoint is the mirror image of the upper endpoint of the
    reflected law.
    """
    if not isinstance(law, Law):
        law = Law.from_measure(law)
    if not math.isfinite(law.measure.inf):
        raise DomainError("two-sided domain needs support bounded from below")
    upper = build_family(law, cfg, method).m_plus
    mirrored = Law.from_measure(law.measure.reflected(), name=f"-{law.name}")
    lower = -build_family(mirrored, cfg, "quad").m_plus
    return lower, upper


def pseudo_variance(family, m):
    """``V(m) = m (1/psi(m) - m)``; ``V(0) = 0`` when 0 is an interior mean."""
    if m == 0:
        family._require_mean(m)
        return 0.0
    return m * family.pv_over_m(m)


def variance(family, m):
    """``v(m) = (m - m0) V(m)/m``; needs a finite ``m0``."""
    if math.isinf(family.m0):
        raise DomainError("variance undefined for this family (m0 = -inf)")
    return (m - family.m0) * family.pv_over_m(m)


def z_of_m(family, m):
    """``z(m) = m + V(m)/m = 1/psi(m)``."""
    return m + family.pv_over_m(m)


def member(family, m):
    """The mean-``m`` member ``V/(V + m(m - x)) nu(dx)`` as a Measure.

    Written as ``c/(c + m - x)`` with ``c = V(m)/m``, which at ``m = 0``
    becomes ``V'(0)/(V'(0) - x)`` with ``V'(0) = 1/psi(0)``.
    """
    c = family.pv_over_m(m)
    z = c + m

    def kernel(x):
        return c / (z - np.asarray(x, dtype=float))

    return family.law.measure.tilted(kernel)


def theta_tilted(family, theta):
    """``P_theta(dx) = nu(dx) / (M(theta)(1 - theta x))``."""
    measure = family.law.measure
    M = integrate(lambda x: 1.0 / (1.0 - theta * x), measure, family.cfg)

    def kernel(x):
        return 1.0 / (M * (1.0 - theta * np.asarray(x, dtype=float)))

    return measure.tilted(kernel)
