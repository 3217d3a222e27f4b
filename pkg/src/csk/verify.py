"""Numerical re-derivation of the identities the library relies on.

Each check produces a residual and a tolerance; it passes iff
``residual <= tolerance``.  Monotonicity checks count violations and use
tolerance 0.  The oracle is always quadrature (``method="quad"``), compared
against closed forms or against the derived formulas.
"""

from dataclasses import dataclass, field, asdict
import math
import time

import numpy as np

from .errors import CskError, NoExtensionError, NumericalError
from .extend import (branch_mean, companion_mean_map, extend_family,
                     extended_member, extended_pseudo_variance,
                     first_extension_bounds, free_power_bound)
from .family import (build_family, member, theta_tilted, variance, z_of_m)
from .iterate import (aw_integral, aw_integrand, cubic_closed_forms,
                      iterate_family, iterated_m_transform, iterated_mean,
                      iterated_pseudo_variance, iterated_variance, mean_map,
                      member_law, quadratic_closed_forms, rebuild,
                      semicircle_second_iteration)
from .measures import Law, law_from_spec
from .quadrature import DEFAULT_CONFIG, integrate, integrate_density
from .transforms import (cauchy_at_upper_bound, cauchy_transform,
                         extrapolate_limit, m_transform, mean_function)

SUITES = ("transforms", "family", "iterate", "extend", "all")

# Fixed parameter tuples for the four-parameter semicircle integral.
AW_TUPLES = ((0.0, 0.0, 0.0, 0.5), (0.0, 0.0, 0.3, 0.5), (0.1, 0.2, 0.3, 0.4),
             (-0.6, 0.6, -0.2, 0.45), (0.55, -0.35, 0.05, -0.5))


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    status: str
    note: str = ""


@dataclass
class VerificationReport:
    law_spec: str
    checks: list = field(default_factory=list)
    wall_time_ms: int = 0

    @property
    def passed(self):
        return all(c.status == "pass" for c in self.checks)

    @property
    def numeric_failure(self):
        return any(c.status == "fail" and c.note.startswith("numerical")
                   for c in self.checks)

    def to_dict(self):
        return {"law_spec": self.law_spec, "wall_time_ms": self.wall_time_ms,
                "passed": self.passed, "checks": [asdict(c) for c in self.checks]}


class _Runner:
    def __init__(self, report, tol_override=None):
        self.report = report
        self.tol_override = tol_override

    def check(self, name, fn, tol, expect=None):
        """Run ``fn`` (returning a residual) and record the outcome.

        ``expect`` names an exception type whose occurrence is the
        expected result; the check then passes with residual 0.
        """
        if self.tol_override is not None and tol > 0:
            tol = self.tol_override
        note = ""
        try:
            residual = float(fn())
            if expect is not None:
                residual, note = math.inf, f"expected {expect.__name__}"
        except Exception as exc:  # noqa: BLE001 - every failure becomes a row
            if expect is not None and isinstance(exc, expect):
                residual, note = 0.0, str(exc)
            elif isinstance(exc, NumericalError):
                residual = exc.residual if exc.residual is not None else math.inf
                note = f"numerical: {exc}"
                if residual <= tol:
                    residual = math.inf
            elif isinstance(exc, CskError):
                residual, note = math.inf, f"{type(exc).__name__}: {exc}"
            else:
                raise
        status = "pass" if residual <= tol else "fail"
        self.report.checks.append(Check(name, residual, tol, status, note))


def _rel(a, b):
    if math.isinf(a) or math.isinf(b):
        return 0.0 if a == b else math.inf
    return abs(a - b) / max(1.0, abs(b))


def _violations(values, increasing=True):
    d = np.diff(np.asarray(values, dtype=float))
    return int(np.sum(d <= 0 if increasing else d >= 0))


def mean_grid(family, n=20):
    """``n`` interior means; a window of width ``5 max(1, |m_plus|)`` when ``m0 = -inf``."""
    m0, mp = family.m0, family.m_plus
    lo = m0 if math.isfinite(m0) else mp - 5.0 * max(1.0, abs(mp))
    return list(np.linspace(lo, mp, n + 2)[1:-1])


def theta_grid(family, n=50):
    tp = family.theta_plus
    hi = tp if math.isfinite(tp) else 10.0
    return list(np.linspace(0, hi, n + 2)[1:-1])


def _one(x):
    return np.ones_like(x)


def default_m1(family):
    m0, mp = family.m0, family.m_plus
    if math.isfinite(m0):
        return 0.5 * (m0 + mp)
    return mp - max(1.0, abs(mp))


# ---------------------------------------------------------------------------
# suites


def _transforms(run, law, cfg):
    fam = build_family(law, cfg, "quad")
    forms = law.closed_forms
    run.check("transforms.mass", lambda: abs(integrate(_one, law.measure, cfg) - 1), 1e-7)

    thetas = theta_grid(fam)
    ks = [mean_function(law, t, cfg, "quad") for t in thetas]
    run.check("transforms.k_increasing", lambda: _violations(ks), 0)

    def m_identity():
        return max(abs(m_transform(law, t, cfg, "quad") * (1 - t * k) - 1)
                   for t, k in zip(thetas[::5], ks[::5]))
    run.check("transforms.M_equals_1_over_1_minus_theta_k", m_identity, 1e-8)

    # z G(z) - 1 decays like z**-0.5 for laws without a first moment, so the
    # limit is extrapolated from z = 10**4 .. 10**10 rather than read off once.
    def zg_limit():
        zs = [10.0 ** k for k in range(4, 11)]
        return abs(extrapolate_limit([z * cauchy_transform(law, z, cfg, "quad")
                                      for z in zs]) - 1)
    run.check("transforms.G_times_z_tends_to_1", zg_limit, 1e-5)
    if fam.A < 0:
        edge = 1.0 / fam.A
        branch = [branch_mean(fam, edge * s) for s in np.geomspace(1e3, 1 + 1e-3, 50)]
        run.check("transforms.k_increasing_negative_branch",
                  lambda: _violations(branch), 0)
    if forms is not None:
        zs = [fam.A + d for d in (0.1, 0.5, 1.0, 8.0)]
        run.check("transforms.G_closed_vs_quadrature",
                  lambda: max(_rel(cauchy_transform(law, z, cfg, "closed"),
                                   cauchy_transform(law, z, cfg, "quad")) for z in zs),
                  1e-9)
        run.check("transforms.G_at_B_closed_vs_limit",
                  lambda: _rel(cauchy_at_upper_bound(law, cfg, "quad"),
                               cauchy_at_upper_bound(law, cfg, "closed")), 1e-6)
    return fam


def _family(run, law, cfg):
    fam = build_family(law, cfg, "quad")
    forms = law.closed_forms
    if forms is not None:
        run.check("family.m0_vs_closed_form", lambda: _rel(fam.m0, forms.m0), 1e-6)
        run.check("family.m_plus_vs_closed_form",
                  lambda: _rel(fam.m_plus, forms.m_plus), 1e-6)
    run.check("family.m0_below_m_plus", lambda: 0.0 if fam.m0 < fam.m_plus else 1.0, 0)

    thetas = theta_grid(fam, 8)
    run.check("family.psi_of_k_roundtrip",
              lambda: max(abs(fam.psi(fam.k(t)) - t) for t in thetas), 1e-9)

    ms = mean_grid(fam)
    rs = {m: fam.pv_over_m(m) for m in ms}
    run.check("family.z_above_B",
              lambda: sum(1 for m in ms if not m + rs[m] > fam.B), 0)
    run.check("family.pv_over_m_positive", lambda: sum(1 for m in ms if not rs[m] > 0), 0)

    members = {m: member(fam, m) for m in ms}
    run.check("family.member_mass",
              lambda: max(abs(integrate(_one, members[m], cfg) - 1) for m in ms), 1e-7)
    run.check("family.member_mean",
              lambda: max(abs(integrate(lambda x: x, members[m], cfg) - m) for m in ms),
              1e-7)
    if math.isfinite(fam.m0):
        run.check("family.member_variance",
                  lambda: max(abs(integrate(lambda x: (x - m) ** 2, members[m], cfg)
                                  - variance(fam, m)) for m in ms), 1e-6)
        run.check("family.variance_nonnegative",
                  lambda: sum(1 for m in ms if variance(fam, m) < 0), 0)
    run.check("family.G_of_z_times_V",
              lambda: max(abs(cauchy_transform(law, z_of_m(fam, m), cfg, "quad")
                              * m * rs[m] - m) for m in ms if m != 0), 1e-7)
    if forms is not None:
        run.check("family.inverted_pv_vs_closed_form",
                  lambda: max(abs(rs[m] - forms.pv_over_m(m)) / abs(forms.pv_over_m(m))
                              for m in ms), 1e-6)

    def tilt_roundtrip():
        worst = 0.0
        for t in theta_grid(fam, 5):
            q, p = member(fam, fam.k(t)), theta_tilted(fam, t)
            if law.measure.density is not None:
                lo = max(law.measure.lower, law.measure.upper - 10)
                xs = np.linspace(lo, law.measure.upper, 41)[1:-1]
                worst = max(worst, float(np.max(np.abs(q.density(xs) - p.density(xs)))))
            for (x, w), (_, w2) in zip(q.atoms, p.atoms):
                worst = max(worst, abs(w - w2))
        return worst
    run.check("family.member_equals_theta_tilt", tilt_roundtrip, 1e-8)
    return fam


def _iterate(run, law, cfg, m1=None):
    fam = build_family(law, cfg, "quad")
    m1 = default_m1(fam) if m1 is None else m1
    it = iterate_family(fam, m1)
    lo, hi = it.domain
    forms = law.closed_forms
    tag = f"iterate[m1={m1:g}]"

    if forms is not None:
        closed_it = iterate_family(build_family(law, cfg, "auto"), m1)
        run.check(f"{tag}.domain_vs_closed_form",
                  lambda: _rel(hi, closed_it.mbar_plus), 1e-6)

    ms = mean_grid(fam, 12)
    run.check(f"{tag}.mean_map_increasing",
              lambda: _violations([mean_map(it, m) for m in ms]), 0)
    run.check(f"{tag}.mean_map_in_domain",
              lambda: sum(1 for m in ms if not lo < mean_map(it, m) < hi + 1e-9), 0)

    rb = rebuild(it)
    run.check(f"{tag}.rebuilt_m0_equals_m1", lambda: abs(rb.m0 - m1), 1e-6)
    run.check(f"{tag}.rebuilt_m_plus_equals_domain", lambda: _rel(rb.m_plus, hi), 1e-6)

    mbars = list(np.linspace(lo, hi, 12)[1:-1])
    run.check(f"{tag}.direct_vs_derived_pv",
              lambda: max(abs(rb.pv_over_m(mb) * mb - iterated_pseudo_variance(it, mb))
                          / max(1.0, abs(mb * rb.pv_over_m(mb))) for mb in mbars), 1e-5)
    run.check(f"{tag}.psi_preserved",
              lambda: max(abs(rb.psi(mean_map(it, m)) - fam.psi(m))
                          for m in ms[2:-2:3]), 1e-8)
    run.check(f"{tag}.v1_finite",
              lambda: sum(1 for mb in mbars if not math.isfinite(iterated_variance(it, mb))),
              0)

    qlaw = member_law(it)
    thetas = [t for t in theta_grid(fam, 4)] + [it.theta1]

    def m1_direct():
        return max(abs(iterated_m_transform(it, t)
                       - integrate(lambda x: 1 / (1 - t * x), qlaw.measure, cfg))
                   for t in thetas)
    run.check(f"{tag}.M1_formula_vs_quadrature", m1_direct, 1e-7)

    def k1_direct():
        return max(abs(iterated_mean(it, t) - mean_function(qlaw, t, cfg, "quad"))
                   for t in thetas)
    run.check(f"{tag}.k1_formula_vs_quadrature", k1_direct, 1e-7)

    if forms is not None and (forms.quadratic or forms.cubic):
        cf = (quadratic_closed_forms(*forms.quadratic, m1) if forms.quadratic
              else cubic_closed_forms(*forms.cubic, m1))
        auto_it = iterate_family(build_family(law, cfg, "auto"), m1)
        run.check(f"{tag}.closed_form_v1_vs_pipeline",
                  lambda: max(abs(cf.v1(mb) - iterated_variance(auto_it, mb))
                              / max(1.0, abs(cf.v1(mb))) for mb in mbars), 1e-8)

    if law.name == "semicircle":
        _semicircle_extras(run, law, cfg)


def _semicircle_extras(run, law, cfg):
    for a in AW_TUPLES:
        label = ",".join(f"{v:g}" for v in a)
        run.check(f"iterate.aw_integral[{label}]",
                  lambda a=a: abs(aw_integral(*a) - integrate_density(
                      aw_integrand(*a), _one, -2.0, 2.0, "sqrt", "sqrt", cfg)), 1e-9)
    m1, m2 = 0.3, 0.5
    v2, (lo, hi) = semicircle_second_iteration(m1, m2)
    fam = build_family(law, cfg, "quad")
    f1 = rebuild(iterate_family(fam, m1))
    f2 = build_family(Law.from_measure(member(f1, m2)), cfg, "quad")
    pts = list(np.linspace(lo, hi, 7)[1:-1])
    run.check("iterate.second_iteration_v2",
              lambda: max(abs(variance(f2, m) - v2(m)) for m in pts), 1e-5)


def _extend(run, law, cfg):
    fam = build_family(law, cfg, "auto")
    forms = law.closed_forms
    ext = extend_family(fam)
    bm, bM = ext.m_plus_bold, ext.M_plus_bold
    run.check("extend.bold_m_plus_at_least_m_plus",
              lambda: 0.0 if bm >= fam.m_plus else 1.0, 0)
    if bM is not None:
        run.check("extend.bold_M_plus_at_least_bold_m_plus",
                  lambda: 0.0 if bM >= bm else 1.0, 0)
    if forms is not None:
        run.check("extend.h_at_bold_m_plus_equals_A",
                  lambda: abs(ext.h(bm) - fam.A), 1e-8)
    if fam.A < 0:
        qfam = build_family(law, cfg, "quad")
        from_h, from_theta = first_extension_bounds(qfam)
        if from_h is not None:
            run.check("extend.bold_m_plus_h_root_vs_theta_limit",
                      lambda: abs(from_h - from_theta), 1e-6)
        run.check("extend.k_at_minus_infinity_is_m_plus",
                  lambda: abs(branch_mean(qfam, -1e7) - qfam.m_plus), 1e-5)

    if forms is not None:
        left = (list(np.linspace(fam.m0, bm, 22)[1:-1]) if math.isfinite(fam.m0)
                else list(np.linspace(bm - 5 * max(1, abs(bm)), bm, 22)[:-1]))
        run.check("extend.h_decreasing_below_bold_m_plus",
                  lambda: _violations([ext.h(m) for m in left], increasing=False), 0)
        if ext.has_companion:
            top = ext.M_tilde if math.isfinite(ext.M_tilde) else bm + 5 * max(1, abs(bm))
            right = list(np.linspace(bm, top, 22)[1:-1])
            run.check("extend.h_increasing_above_bold_m_plus",
                      lambda: _violations([ext.h(m) for m in right]), 0)
            lo_c = max(ext.m_tilde, bm - 5 * max(1, abs(bm)))
            cms = list(np.linspace(lo_c, bm, 12)[1:-1])
            gs = [companion_mean_map(ext, m) for m in cms]
            run.check("extend.companion_preserves_h",
                      lambda: max(abs(ext.h(g) - ext.h(m)) for g, m in zip(gs, cms)), 1e-9)
            run.check("extend.companion_decreasing", lambda: _violations(gs, False), 0)
        if bM is not None and bM > bm and ext.has_companion:
            hi = min(bM, ext.M_tilde, bm + 5 * max(1, abs(bm)))
            pts = list(np.linspace(bm, hi, 5)[1:-1])
            run.check("extend.extended_pv_vs_closed_form",
                      lambda: max(abs(extended_pseudo_variance(ext, m)
                                      - forms.pseudo_variance(m))
                                  / max(1.0, abs(forms.pseudo_variance(m))) for m in pts),
                      1e-6)
        if not ext.has_companion:
            run.check("extend.no_extension_reported",
                      lambda: extended_pseudo_variance(ext, bm + 0.2),
                      0, expect=NoExtensionError)
        for alpha in (1.5, 2.0, 4.0):
            run.check(f"extend.free_power_scaling[alpha={alpha:g}]",
                      lambda alpha=alpha: _rel(free_power_bound(fam, alpha),
                                               alpha * bM if bM is not None else math.nan),
                      1e-8)

    for m in _regime_grid(fam, ext):
        q = extended_member(fam, m).measure
        run.check(f"extend.Qbar_mass[m={m:.6g}]",
                  lambda q=q: abs(integrate(_one, q, cfg) - 1), 1e-6)
        run.check(f"extend.Qbar_mean[m={m:.6g}]",
                  lambda q=q, m=m: abs(integrate(lambda x: x, q, cfg) - m), 1e-6)
        if math.isfinite(fam.m0):
            run.check(f"extend.Qbar_variance[m={m:.6g}]",
                      lambda q=q, m=m: abs(integrate(lambda x: (x - m) ** 2, q, cfg)
                                           - (m - fam.m0) * (ext.h(m) - m)),
                      1e-6)


def _regime_grid(fam, ext):
    """Means in each regime: below m_plus, (m_plus, bold_m_plus), (bold_m_plus, bold_M_plus)."""
    mp, bm = fam.m_plus, ext.m_plus_bold
    upper = ext.M_plus_bold if ext.M_plus_bold is not None else bm
    pts = list(np.linspace(*(fam.m0, mp) if math.isfinite(fam.m0)
                           else (mp - 2 * max(1, abs(mp)), mp), 4)[1:-1])
    if bm > mp:
        pts += list(np.linspace(mp, bm, 4)[1:-1])
    if upper > bm:
        top = upper if math.isfinite(upper) else bm + 4 * max(1, abs(bm))
        pts += list(np.linspace(bm, top, 4)[1:-1])
    return pts


_SUITE_FUNCS = {"transforms": _transforms, "family": _family,
                "iterate": _iterate, "extend": _extend}


def verify(spec, suite="all", tol=None, cfg=DEFAULT_CONFIG, m1=None):
    """Run a verification suite for a law spec and return the report."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    law = law_from_spec(spec) if isinstance(spec, str) else spec
    report = VerificationReport(law.spec)
    run = _Runner(report, tol)
    start = time.perf_counter()
    names = list(_SUITE_FUNCS) if suite == "all" else [suite]
    for name in names:
        try:
            if name == "iterate":
                _iterate(run, law, cfg, m1)
            else:
                _SUITE_FUNCS[name](run, law, cfg)
        except CskError as exc:
            note = (f"numerical: {exc}" if isinstance(exc, NumericalError)
                    else f"{type(exc).__name__}: {exc}")
            report.checks.append(Check(f"{name}.setup", math.inf, 0.0, "fail", note))
    report.checks.sort(key=lambda c: c.name)
    report.wall_time_ms = int(round(1000 * (time.perf_counter() - start)))
    return report
