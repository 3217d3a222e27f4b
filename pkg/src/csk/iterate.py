"""Iterated families generated by a single member ``Q_{m1}``.

With ``r(m) = V(m)/m`` the mean map reads

    mbar = (m r(m1) - m1 r(m)) / (r(m1) - r(m)),

which equals the usual ``(m^2 V(m1) - m1^2 V(m)) / (m V(m1) - m1 V(m))`` for
``m, m1 != 0`` and stays defined when either is zero.  The iterated
pseudo-variance follows from ``V1(mbar)/mbar + mbar = V(m)/m + m``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalError
from .family import build_family, member
from .measures import Law
from .transforms import (m_transform, m_transform_derivative, mean_function,
                         mean_function_derivative)

BRANCH_TOL = 1e-7
DIFF_STEP = 1e-5
SLOPE_STEP = 1e-4


@dataclass(frozen=True)
class IteratedFamily:
    base: object  # CskFamily
    m1: float
    theta1: float
    r1: float  # V(m1)/m1
    mbar0: float
    mbar_plus: float

    @property
    def domain(self):
        return (self.mbar0, self.mbar_plus)

    def contains(self, mbar):
        return self.mbar0 < mbar < self.mbar_plus


def iterate_family(family, m1):
    """The family ``K_+(Q_{m1})`` described through the base family."""
    family._require_mean(m1)
    r1 = family.pv_over_m(m1)
    theta1 = 1.0 / (m1 + r1)
    lower, upper = _domain(family, m1, r1)
    return IteratedFamily(family, float(m1), theta1, r1, lower, upper)


def _domain(family, m1, r1):
    g_B = family.cauchy_at_B
    if math.isinf(g_B):
        return m1, family.m_plus
    denom = g_B * r1 - 1.0
    if abs(denom) <= 1e-12 * max(1.0, abs(g_B * r1)):
        raise NumericalError("iterated domain degenerates: G(B) = m1/V(m1)",
                             residual=abs(denom))
    return m1, (family.m_plus * g_B * r1 - m1) / denom


def iterated_domain(it):
    """``(m1, (m_+ G(B) - m1^2/V(m1)) / (G(B) - m1/V(m1)))``; ``m_+`` if ``G(B) = inf``."""
    return it.domain


def member_law(it):
    """``Q_{m1}`` wrapped as a raw law (no closed forms)."""
    base = it.base.law
    return Law.from_measure(member(it.base, it.m1),
                            name=f"Q[{base.spec};m1={it.m1:g}]")


def _check_theta(it, theta):
    if not 0 < theta < it.base.theta_plus:
        raise DomainError(f"theta={theta} outside (0, {it.base.theta_plus})")


def iterated_m_transform(it, theta):
    """``M1(theta) = (theta M(theta) - theta1 M(theta1)) / (M(theta1)(theta - theta1))``."""
    _check_theta(it, theta)
    fam, t1 = it.base, it.theta1
    M1 = m_transform(fam.law, t1, fam.cfg, fam.method)
    if abs(theta - t1) < BRANCH_TOL:
        dM1 = m_transform_derivative(fam.law.measure, t1, fam.cfg)
        return (M1 + t1 * dM1) / M1
    M = m_transform(fam.law, theta, fam.cfg, fam.method)
    return (theta * M - t1 * M1) / (M1 * (theta - t1))


def iterated_mean(it, theta):
    """``k1(theta) = (theta k - theta1 k1) / ((theta - theta1) + theta theta1 (k - k1))``."""
    _check_theta(it, theta)
    fam, t1 = it.base, it.theta1
    k1 = mean_function(fam.law, t1, fam.cfg, fam.method)
    if abs(theta - t1) < BRANCH_TOL:
        dk = mean_function_derivative(fam.law.measure, t1, fam.cfg)
        return (k1 + t1 * dk) / (1.0 + t1 * t1 * dk)
    k = mean_function(fam.law, theta, fam.cfg, fam.method)
    return (theta * k - t1 * k1) / ((theta - t1) + theta * t1 * (k - k1))


def _pv_over_m_slope(family, m):
    """``d/dm (V(m)/m)``: closed form when available, else a central difference."""
    forms = family.closed_forms
    if forms is not None and m != 0:
        return (float(forms.pv_derivative(m)) - float(forms.pv_over_m(m))) / m
    h = DIFF_STEP * max(1.0, abs(m))
    return (family.pv_over_m(m + h) - family.pv_over_m(m - h)) / (2 * h)


def _raw_mean_map(it, m):
    r = it.base.pv_over_m(m)
    return (m * it.r1 - it.m1 * r) / (it.r1 - r)


def _mean_map_slope(it):
    """Slope of the mean map at ``m1``, by a central difference well outside the branch."""
    fam, m1 = it.base, it.m1
    room = min(m1 - fam.m0, fam.m_plus - m1)
    h = min(SLOPE_STEP * max(1.0, abs(m1)), 0.25 * room)
    return (_raw_mean_map(it, m1 + h) - _raw_mean_map(it, m1 - h)) / (2 * h)


def mean_map(it, m):
    """Mean of the iterated member sharing ``theta = psi(m)``.

    Within ``BRANCH_TOL`` of ``m1`` the quotient is 0/0; there the limit
    ``m1 - r(m1)/r'(m1)`` is used, plus the first-order term so the map stays
    strictly increasing (and invertible) across the branch window.
    """
    fam = it.base
    fam._require_mean(m)
    m1 = it.m1
    if abs(m - m1) < BRANCH_TOL:
        limit = m1 - it.r1 / _pv_over_m_slope(fam, m1)
        return limit if m == m1 else limit + _mean_map_slope(it) * (m - m1)
    return _raw_mean_map(it, m)


def mean_map_inverse(it, mbar):
    """Base mean ``m`` with ``mean_map(m) = mbar``; ``mean_map`` is increasing."""
    if not it.contains(mbar):
        raise DomainError(f"mbar={mbar} outside the iterated domain {it.domain}")
    fam = it.base
    m0, mp = fam.m0, fam.m_plus
    anchor = it.m1

    def f(m):
        return mean_map(it, m) - mbar

    if f(anchor) == 0:
        return anchor
    if f(anchor) > 0:
        lo = None
        for j in range(0, 200):
            step = 2.0 ** j if math.isinf(m0) else (anchor - m0) * (1 - 2.0 ** -(j + 1))
            cand = anchor - step
            if cand > m0 and f(cand) < 0:
                lo = cand
                break
        hi = anchor
    else:
        hi = None
        for j in range(1, 60):
            cand = mp - (mp - anchor) * 2.0 ** -j
            if f(cand) > 0:
                hi = cand
                break
        lo = anchor
    if lo is None or hi is None:
        raise NumericalError(f"could not bracket the base mean for mbar={mbar}")
    return brentq(f, lo, hi, xtol=1e-14 * max(1.0, abs(mbar)), rtol=1e-14,
                  maxiter=200)


def iterated_pv_over_m(it, mbar):
    """``V1(mbar)/mbar = V(m)/m + m - mbar`` with ``m`` the preimage of ``mbar``."""
    m = mean_map_inverse(it, mbar)
    return it.base.pv_over_m(m) + m - mbar


def iterated_pseudo_variance(it, mbar):
    return mbar * iterated_pv_over_m(it, mbar)


def iterated_variance(it, mbar):
    """``v1(mbar) = (mbar - m1) V1(mbar)/mbar``; ``Q_{m1}`` always has a finite mean."""
    return (mbar - it.m1) * iterated_pv_over_m(it, mbar)


def iterated_psi(it, mbar):
    """``psi1(mbar) = 1/(mbar + V1(mbar)/mbar)``, which equals ``psi(m)``."""
    return 1.0 / (mbar + iterated_pv_over_m(it, mbar))


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class IteratedClosedForms:
    m_of_mbar: object
    mbar_of_m: object
    v1: object


def quadratic_closed_forms(a, b, m1):
    """Iteration of ``V(m) = 1 + a m + b m^2`` (centered, ``m0 = 0``)."""
    def denom(mbar):
        return 1.0 + a * m1 + b * m1 * mbar

    def m_of_mbar(mbar):
        return (mbar - m1) / denom(mbar)

    def v1(mbar):
        P = (1.0 + mbar * (a + b * mbar)) * (1.0 + m1 * (a - mbar + (b + 1.0) * m1))
        return P / denom(mbar)

    def mbar_of_m(m):
        return (m * (1.0 + a * m1) + m1) / (1.0 - b * m1 * m)

    return IteratedClosedForms(m_of_mbar, mbar_of_m, v1)


def cubic_closed_forms(a, b, c, m1):
    """Iteration of ``V(m) = m (a m^2 + b m + c)`` with ``a > 0``."""
    if not a > 0:
        raise DomainError("cubic closed forms need a > 0")

    def m_of_mbar(mbar):
        return -(mbar * (b + a * m1) + c) / (a * (mbar - m1))

    def v1(mbar):
        Q = (c + mbar * (b + a * mbar)) * (c - mbar + m1 * (b + a * m1 + 1.0))
        return Q / (a * (mbar - m1))

    def mbar_of_m(m):
        return (a * m * m1 - c) / (a * (m + m1) + b)

    return IteratedClosedForms(m_of_mbar, mbar_of_m, v1)


def semicircle_second_iteration(m1, m2):
    """``(v2, domain)`` for ``K_+(Q_{m2,m1})`` of the semicircle.

    The domain is ``(m2, m2 + m1^2 - m1 m2 + 1)``.
    """
    scale = m1 * m1 - m2 * m1 + 1.0

    def v2(m):
        return (1.0 - (m - m1) * m1) * ((m1 - m2) * (m + m1 - m2) + 1.0) / scale

    return v2, (m2, m2 + scale)


# ---------------------------------------------------------------------------
# the four-parameter semicircle integral


def aw_integral(a1, a2, a3, a4):
    """``int_{-2}^{2} sqrt(4-x^2) prod_j (1 + a_j^2 - a_j x)^-1 dx`` in closed form.

    Equals ``2 pi (1 - a1 a2 a3 a4) prod_{i<j} (1 - a_i a_j)^-1`` for
    ``|a_j| < 1``.
    """
    a = np.array([a1, a2, a3, a4], dtype=float)
    if np.any(np.abs(a) >= 1):
        raise DomainError("all parameters must satisfy |a_j| < 1")
    pairs = np.prod([1.0 - a[i] * a[j] for i in range(4) for j in range(i + 1, 4)])
    return 2.0 * np.pi * (1.0 - np.prod(a)) / pairs


def aw_integrand(a1, a2, a3, a4):
    """The integrand of :func:`aw_integral`, for cross-checking by quadrature."""
    a = np.array([a1, a2, a3, a4], dtype=float)

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.sqrt(np.clip(4.0 - x * x, 0.0, None))
        for aj in a:
            out = out / (1.0 + aj * aj - aj * x)
        return out

    return f


def rebuild(it, cfg=None):
    """Run :func:`build_family` on ``Q_{m1}`` itself (numerical oracle for the iteration)."""
    return build_family(member_law(it), cfg or it.base.cfg, "quad")
