"""Extensions of the domain of means beyond ``m_plus``.

First extension: when ``A = sup supp < 0`` the kernel ``1/(1 - theta x)``
keeps one sign on the support for ``theta < 1/A`` and ``k`` continues
increasingly from ``m_plus`` (at ``theta -> -inf``) up to ``bold_m_plus``
(at ``theta -> 1/A``).  Equivalently ``bold_m_plus`` is the first ``m``
where ``h(m) = V(m)/m + m`` reaches ``A``.

Second extension: up to ``bold_M_plus = inf{m > m0 : V(m)/m < 0}`` the
measures ``Q_m + p(m) delta_{h(m)}`` with ``p(m) = 1 - V(m)/m G(h(m))`` are
probability measures with mean ``m``.  Beyond ``m_plus`` this needs ``V``
past its natural domain, which is taken from the catalog closed form (the
analytic continuation) or, below ``bold_m_plus`` when ``A < 0``, from the
negative-theta branch.
"""

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NoExtensionError, NumericalError
from .quadrature import integrate
from .transforms import (cauchy_transform, extrapolate_limit,
                         sample_until_failure)

INF = math.inf
HORIZON = 1e6
DIFF_STEP = 1e-5


# ---------------------------------------------------------------------------
# V/m beyond the natural domain


def _closed_forms(family):
    return family.law.closed_forms


def psi_ext(family, m):
    """Inverse of ``k`` on the branch ``theta < 1/A`` (only when ``A < 0``).

    On that branch ``1 - theta x < 0`` on the support, so
    ``int (x - m)/(1 - theta x) dnu`` has the sign of ``m - k(theta)``.
    """
    A = family.A
    if not A < 0:
        raise DomainError("the negative-theta branch exists only when A < 0")
    measure, cfg = family.law.measure, family.cfg

    def f(theta):
        return integrate(lambda x: (x - m) / (1.0 - theta * x), measure, cfg)

    edge = 1.0 / A
    near = next((edge * (1 + 10.0 ** -j) for j in range(1, 16)
                 if f(edge * (1 + 10.0 ** -j)) < 0), None)
    far = next((edge * 2.0 ** j for j in range(1, 200)
                if f(edge * 2.0 ** j) > 0), None)
    if near is None or far is None:
        raise DomainError(f"m={m} is not reached by k on (-inf, {edge})")
    return brentq(f, far, near, xtol=1e-15 * abs(near), rtol=1e-14, maxiter=200)


def branch_mean(family, theta):
    """``k(theta)`` on the negative branch, by quadrature."""
    A = family.A
    if not (A < 0 and theta < 1.0 / A):
        raise DomainError(f"theta={theta} is not on the branch (-inf, 1/A)")
    measure, cfg = family.law.measure, family.cfg
    M = integrate(lambda x: 1.0 / (1.0 - theta * x), measure, cfg)
    N = integrate(lambda x: x / (1.0 - theta * x), measure, cfg)
    return N / M


def branch_limit(family):
    """``lim k(theta)`` as ``theta -> 1/A`` from below."""
    edge = 1.0 / family.A
    thetas = [edge * (1 + 10.0 ** -j) for j in range(2, 9)]
    values = sample_until_failure(lambda t: branch_mean(family, t), thetas)
    return extrapolate_limit(values, direction=1.0)


def pv_over_m_ext(family, m, bold_m_plus=None):
    """``V(m)/m`` for ``m > m0``: closed form if known, else ``psi``/``psi_ext``."""
    forms = _closed_forms(family)
    if not m > family.m0:
        raise DomainError(f"m={m} not above m0={family.m0}")
    if forms is not None:
        return float(forms.pv_over_m(m))
    if m < family.m_plus:
        return family.pv_over_m(m)
    if family.A < 0 and (bold_m_plus is None or m < bold_m_plus) and m > family.m_plus:
        return 1.0 / psi_ext(family, m) - m
    raise DomainError(f"V(m) beyond {family.m_plus} needs a closed form")


def _h(family, m, bold_m_plus=None):
    return pv_over_m_ext(family, m, bold_m_plus) + m


# ---------------------------------------------------------------------------
# bounds


def _scan_grid(start, horizon=HORIZON):
    """Points ``start + d`` with geometrically growing ``d`` up to ``horizon``."""
    scale = max(1.0, abs(start))
    d = 1e-6 * scale
    points = []
    while d <= horizon:
        points.append(start + d)
        d *= 1.05
    return points


def _first_touch(h, A, start, tol, dh=None):
    """Smallest ``m > start`` with ``h(m) = A``, crossing or tangential.

    A tangential touch is located as the root of ``dh`` (``h'``), which is
    far better conditioned than minimising ``h`` itself.
    """
    if dh is None:
        dh = lambda t: (h(t + DIFF_STEP) - h(t - DIFF_STEP)) / (2 * DIFF_STEP)  # noqa: E731
    prev, h_prev = start, h(start)
    if abs(h_prev - A) <= tol:
        return start
    for m in _scan_grid(start):
        hm = h(m)
        if hm <= A:
            return brentq(lambda t: h(t) - A, prev, m, xtol=1e-15, rtol=1e-15)
        if hm > h_prev:
            # h turned up: look for the minimum in the last two steps
            lo = max(prev - (m - prev), start)
            if dh(lo) < 0 < dh(m):
                t = brentq(dh, lo, m, xtol=1e-13, rtol=1e-13)
                if abs(h(t) - A) <= tol:
                    return t
            return None
        prev, h_prev = m, hm
    return None


def _h_slope(forms, m):
    """``h'(m) = (V'(m) - V(m)/m)/m + 1`` from the closed forms."""
    if m == 0:
        h = DIFF_STEP
        return (forms.pv_over_m(h) - forms.pv_over_m(-h)) / (2 * h) + 1.0
    return (float(forms.pv_derivative(m)) - float(forms.pv_over_m(m))) / m + 1.0


def first_extension_bounds(family):
    """``(from_h, from_theta)``: the two characterisations of ``bold_m_plus``.

    ``from_h`` is ``inf{m > m0 : h(m) = A}`` (needs a closed form, else
    ``None``); ``from_theta`` is the limit of ``k`` at ``1/A`` (``None``
    when ``A >= 0``).
    """
    A = family.A
    forms = _closed_forms(family)
    from_h = None
    if forms is not None:
        tol = 1e-9 * max(1.0, abs(A))
        from_h = _first_touch(lambda m: float(forms.pv_over_m(m)) + m, A,
                              family.m_plus, tol, lambda m: _h_slope(forms, m))
    from_theta = branch_limit(family) if A < 0 else None
    return from_h, from_theta


def first_extension_bound(family):
    """``bold_m_plus``; equals ``m_plus`` whenever ``A >= 0``."""
    if family.A >= 0:
        return family.m_plus
    from_h, from_theta = first_extension_bounds(family)
    return from_h if from_h is not None else from_theta


def _first_negative(r, start):
    """``inf{m > start : r(m) < 0}``, scanning up to the horizon."""
    if r(start) < 0:
        return start
    prev = start
    for m in _scan_grid(start):
        if r(m) < 0:
            if r(prev) == 0:
                return prev
            return brentq(r, prev, m, xtol=1e-15, rtol=1e-15)
        prev = m
    return INF


def second_extension_bound(family):
    """``bold_M_plus = inf{m > m0 : V(m)/m < 0}``; ``inf`` if never negative."""
    forms = _closed_forms(family)
    if forms is None:
        raise DomainError("the second extension needs a closed-form V")
    # V/m > 0 on (m0, m_plus), so the scan starts at m_plus.
    return _first_negative(lambda m: float(forms.pv_over_m(m)), family.m_plus)


def free_power_bound(family, alpha):
    """``bold_M_plus`` for ``m -> alpha V(m/alpha)``, checked against ``alpha bold_M_plus``."""
    if not alpha >= 1:
        raise DomainError("free convolution powers need alpha >= 1")
    forms = _closed_forms(family)
    if forms is None:
        raise DomainError("free_power_bound needs a closed-form V")
    scaled = _first_negative(lambda m: float(forms.pv_over_m(m / alpha)),
                             alpha * family.m_plus)
    expected = alpha * second_extension_bound(family)
    if math.isinf(expected) != math.isinf(scaled) or (
            math.isfinite(expected)
            and abs(scaled - expected) > 1e-9 * max(1.0, abs(expected))):
        raise NumericalError(f"scaled bound {scaled} != alpha * bound {expected}")
    return scaled


# ---------------------------------------------------------------------------
# extended members


@dataclass(frozen=True)
class ExtendedMember:
    ac_part: object  # Measure
    atom_location: float
    atom_weight: float

    @property
    def measure(self):
        if self.atom_weight > 0:
            return self.ac_part.with_atom(self.atom_location, self.atom_weight)
        return self.ac_part


def _upper_bound(family):
    forms = _closed_forms(family)
    if forms is not None:
        return second_extension_bound(family)
    if family.A < 0:
        return first_extension_bound(family)
    return family.m_plus


def _cauchy_at(family, z):
    if z > family.A:
        return cauchy_transform(family.law, z, family.cfg, family.method)
    forms = _closed_forms(family)
    with np.errstate(all="ignore"):
        value = float(forms.cauchy_transform(float(z))) if forms else math.nan
    if not math.isfinite(value):
        raise DomainError(f"G is not finite at z={z}")
    return value


def _member_parts(family, m):
    if not family.m0 < m < _upper_bound(family):
        raise DomainError(f"m={m} outside the extended domain")
    if family.m0 < m < family.m_plus:
        c = family.pv_over_m(m)
    else:
        c = pv_over_m_ext(family, m)
    if c < 0:
        raise DomainError(f"V(m)/m < 0 at m={m}")
    return c, m + c


def atom_weight(family, m, cfg=None):
    """``p(m) = 1 - V(m)/m G(m + V(m)/m)`` beyond ``m_plus``, else 0."""
    c, z = _member_parts(family, m)
    if m <= family.m_plus:
        return 0.0
    p = 1.0 - c * _cauchy_at(family, z)
    if -1e-9 <= p < 0:
        p = 0.0
    if not 0 <= p <= 1 + 1e-12:
        raise NumericalError(f"atom weight {p} outside [0, 1] at m={m}")
    return min(p, 1.0)


def extended_member(family, m, cfg=None):
    """``Q_m + p(m) delta_{m + V(m)/m}`` for ``m`` in ``(m0, bold_M_plus)``."""
    c, z = _member_parts(family, m)
    p = atom_weight(family, m)

    def kernel(x):
        return c / (z - np.asarray(x, dtype=float))

    measure = family.law.measure
    ac = measure.tilted(kernel, total_mass_hint=1.0 - p)
    if measure.density is not None:
        lo = max(measure.lower, z - 1e6)
        xs = np.linspace(lo, measure.upper, 203)[1:-1]
        if np.any(ac.density(xs) < 0):
            raise NumericalError(f"negative member density at m={m}")
    return ExtendedMember(ac, z, p)


# ---------------------------------------------------------------------------
# companion map and the extended family


@dataclass(frozen=True)
class ExtendedFamily:
    base: object  # CskFamily
    m_plus_bold: float
    m_plus_bold_theta: Optional[float]
    M_plus_bold: Optional[float]
    m_tilde: Optional[float]
    M_tilde: Optional[float]

    @property
    def has_companion(self):
        return self.m_tilde is not None

    def h(self, m):
        return _h(self.base, m, self.m_plus_bold)


def _increasing_end(h, start):
    """Last point of the increasing run of ``h`` above ``start`` (``inf`` at the horizon)."""
    prev, h_prev = start, h(start)
    for m in _scan_grid(start):
        hm = h(m)
        if hm < h_prev:
            return prev, h_prev
        prev, h_prev = m, hm
    return INF, h_prev


def extend_family(family):
    """Compute both extension bounds and the companion-map range."""
    from_h, from_theta = (first_extension_bounds(family)
                          if family.A < 0 else (None, None))
    bold_m = first_extension_bound(family)
    M_bold = (second_extension_bound(family)
              if _closed_forms(family) is not None else None)
    if M_bold is not None and abs(M_bold - bold_m) <= 1e-9 * max(1.0, abs(bold_m)):
        # the two bounds coincide; the tangential root for bold_m carries ~1e-13 noise
        M_bold = bold_m
    m_tilde = M_tilde = None
    if _closed_forms(family) is not None:
        def h(m):
            return _h(family, m, bold_m)
        end, h_top = _increasing_end(h, bold_m)
        if end > bold_m:
            M_tilde = end
            # m_tilde: where the decreasing left branch reaches h_top
            f = lambda m: h(m) - h_top
            lo = None
            for j in range(0, 80):
                cand = (bold_m - 2.0 ** j * max(1.0, abs(bold_m))
                        if math.isinf(family.m0)
                        else family.m0 + (bold_m - family.m0) * 2.0 ** -j)
                if cand <= family.m0:
                    continue
                if f(cand) >= 0:
                    lo = cand
                    break
            if lo is None:
                m_tilde = family.m0
            else:
                m_tilde = brentq(f, lo, bold_m, xtol=1e-14, rtol=1e-14)
    theta_value = from_theta if from_theta is not None else None
    return ExtendedFamily(family, bold_m, theta_value, M_bold, m_tilde, M_tilde)


def companion_mean_map(ext, m):
    """``g(m) = inf{m' >= bold_m_plus : h(m') = h(m)}`` for ``m`` below ``bold_m_plus``."""
    if not ext.has_companion:
        raise NoExtensionError("no companion mean exists: the family cannot be extended")
    if not ext.m_tilde < m < ext.m_plus_bold:
        raise DomainError(f"m={m} outside ({ext.m_tilde}, {ext.m_plus_bold})")
    target = ext.h(m)
    start = ext.m_plus_bold

    def f(t):
        return ext.h(t) - target

    prev = start
    for t in _scan_grid(start):
        if f(t) >= 0:
            return brentq(f, prev, t, xtol=1e-15, rtol=1e-15)
        prev = t
    raise NoExtensionError(f"no companion for m={m} below the horizon")


def companion_inverse(ext, mbar):
    """The ``m`` in ``(m_tilde, bold_m_plus)`` with ``g(m) = mbar``."""
    if not ext.has_companion:
        raise NoExtensionError("no companion mean exists: the family cannot be extended")
    if not ext.m_plus_bold < mbar < ext.M_tilde:
        raise DomainError(f"mbar={mbar} outside ({ext.m_plus_bold}, {ext.M_tilde})")
    target = ext.h(mbar)
    f = lambda m: ext.h(m) - target
    lo = ext.m_tilde
    if not math.isfinite(lo) or f(lo) < 0:
        raise DomainError(f"no base mean with the same h as mbar={mbar}")
    return brentq(f, lo, ext.m_plus_bold, xtol=1e-15, rtol=1e-15)


def extended_psi(ext, mbar):
    """``psi(g^-1(mbar))`` with ``psi`` computed numerically on the base family."""
    m = companion_inverse(ext, mbar)
    fam = ext.base
    if m < fam.m_plus:
        return fam.psi(m)
    return psi_ext(fam, m)


def extended_pseudo_variance(ext, m):
    """``V(m) = m (1/psi_bar(m) - m)`` on ``(bold_m_plus, bold_M_plus)``."""
    if not ext.has_companion:
        raise NoExtensionError("V cannot be extended: no companion means exist")
    upper = ext.M_plus_bold if ext.M_plus_bold is not None else ext.m_plus_bold
    if not ext.m_plus_bold < m < min(upper, ext.M_tilde):
        raise DomainError(f"m={m} outside ({ext.m_plus_bold}, {min(upper, ext.M_tilde)})")
    return m * (1.0 / extended_psi(ext, m) - m)
