"""Command-line interface: ``csk laws|describe|table|verify|iterate``.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numerical non-convergence.
"""

import argparse
import csv
import json
import math
import sys

from .errors import CskError, DomainError, NoExtensionError, NumericalError, SpecError
from .extend import atom_weight, extend_family, first_extension_bounds
from .family import build_family, member, pseudo_variance, variance
from .iterate import (iterate_family, iterated_pseudo_variance,
                      iterated_variance, mean_map, mean_map_inverse)
from .measures import CATALOG, evaluate_density, law_from_spec
from .quadrature import QuadratureConfig
from .verify import SUITES, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# quantity -> name of the abscissa column
QUANTITIES = {
    "density": "x",
    "member_density": "x",
    "pv": "m",
    "variance": "m",
    "mean_map": "m",
    "v1": "mbar",
    "atom_weight": "m",
}

def _num(value):
    """Extended reals as JSON-friendly values at 17 significant digits."""
    if value is None:
        return None
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return None
    return float(format(value, ".17g"))

def _text(value):
    if value is None:
        return "null"
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")

def parse_grid(text):
    """``a:step:b`` -> inclusive grid; values rounded to 12 decimals to kill drift."""
    try:
        a, step, b = (float(p) for p in text.split(":"))
    except ValueError:
        raise SpecError(f"grid must look like a:step:b, got {text!r}") from None
    if not step > 0:
        raise SpecError("grid step must be positive")
    if b < a:
        raise SpecError("grid end must not be below its start")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 12) for i in range(n)]

def _config(args):
    kwargs = {}
    if args.rel_tol is not None:
        kwargs["rel_tol"] = args.rel_tol
    if args.max_subdiv is not None:
        kwargs["max_subdivisions"] = args.max_subdiv
    try:
        return QuadratureConfig(**kwargs)
    except ValueError as exc:
        raise SpecError(str(exc)) from None

def _emit_rows(rows, columns, fmt, out):
    if fmt == "json":
        json.dump([{k: (_num(r[k]) if k != "reason" else r[k]) for k in columns}
                   for r in rows], out, indent=1)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_text(r[k]) if k != "reason" else (r[k] or "")
                         for k in columns])

def _table_rows(xname, qname, xs, fn):
    rows = []
    for x in xs:
        try:
            value, reason = fn(x), None
        except (DomainError, NoExtensionError) as exc:
            value, reason = None, str(exc)
        rows.append({xname: x, qname: value, "reason": reason})
    return rows

# ---------------------------------------------------------------------------
# commands

def cmd_laws(args, out):
    entries = []
    for entry in CATALOG.values():
        if args.filter == "atom" and entry.atoms == "never":
            continue
        params = {k: {"default": d, "range": r} for k, (d, r) in entry.parameters.items()}
        domain = None
        if not entry.parameters or all(d is not None for d, _ in entry.parameters.values()):
            forms = law_from_spec(entry.name).closed_forms
            domain = [_num(forms.m0), _num(forms.m_plus)]
        entries.append({"name": entry.name, "aliases": list(entry.aliases),
                        "params": params, "atoms": entry.atoms,
                        "domain": domain, "summary": entry.summary})
    if args.format == "json":
        json.dump(entries, out, indent=1)
        out.write("\n")
    else:
        for e in entries:
            alias = f" ({', '.join(e['aliases'])})" if e["aliases"] else ""
            params = ", ".join(f"{k}: {v['range']}" for k, v in e["params"].items())
            out.write(f"{e['name']}{alias}\n  {e['summary']}\n")
            if params:
                out.write(f"  parameters: {params}\n")
            out.write(f"  atoms: {e['atoms']}\n")
    return EXIT_OK

def describe(law, cfg, method="auto"):
    fam = build_family(law, cfg, method)
    ext = extend_family(build_family(law, cfg, "auto"))
    info = {
        "law": law.spec, "A": fam.A, "B": fam.B, "theta_plus": fam.theta_plus,
        "m0": fam.m0, "m_plus": fam.m_plus, "G(B)": fam.cauchy_at_B,
        "bold_m_plus": ext.m_plus_bold, "bold_M_plus": ext.M_plus_bold,
        "m_tilde": ext.m_tilde, "M_tilde": ext.M_tilde,
    }
    if fam.A < 0:
        from_h, from_theta = first_extension_bounds(build_family(law, cfg, "quad"))
        if from_h is not None and abs(from_h - from_theta) > 1e-6:
            info["bold_m_plus_theta_limit"] = from_theta
    entry = next((e for e in CATALOG.values() if e.name == law.name), None)
    info["pseudo_variance"] = entry.summary.split("; ")[-1] if entry else None
    return info

def cmd_describe(args, out):
    info = describe(law_from_spec(args.law), _config(args), args.method)
    if args.format == "json":
        json.dump({k: (_num(v) if not isinstance(v, str) else v)
                   for k, v in info.items()}, out, indent=1)
        out.write("\n")
    else:
        for k, v in info.items():
            out.write(f"{k}: {_text(v) if not isinstance(v, str) else v}\n")
    return EXIT_OK

def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise SpecError(f"--{name} is required for this quantity")

def cmd_table(args, out):
    law = law_from_spec(args.law)
    cfg = _config(args)
    q = args.quantity
    xs = parse_grid(args.grid)
    fam = build_family(law, cfg, args.method)
    if q == "density":
        fn = lambda x: evaluate_density(law.measure, x)  # noqa: E731
    elif q == "member_density":
        _require(args, "m")
        mem = member(fam, args.m)
        fn = lambda x: evaluate_density(mem, x)  # noqa: E731
    elif q == "pv":
        fn = lambda m: pseudo_variance(fam, m)  # noqa: E731
    elif q == "variance":
        fn = lambda m: variance(fam, m)  # noqa: E731
    elif q == "atom_weight":
        fn = lambda m: atom_weight(fam, m)  # noqa: E731
    else:
        _require(args, "m1")
        it = iterate_family(fam, args.m1)
        fn = ((lambda m: mean_map(it, m)) if q == "mean_map"
              else (lambda mb: iterated_variance(it, mb)))
    xname = QUANTITIES[q]
    _emit_rows(_table_rows(xname, q, xs, fn), [xname, q, "reason"], args.format, out)
    return EXIT_OK

def cmd_iterate(args, out):
    law = law_from_spec(args.law)
    cfg = _config(args)
    fam = build_family(law, cfg, args.method)
    it = iterate_family(fam, args.m1)
    if args.quantity is not None:
        if args.grid is None:
            raise SpecError("--quantity needs --grid")
        xs = parse_grid(args.grid)
        fns = {"v1": lambda mb: iterated_variance(it, mb),
               "pv1": lambda mb: iterated_pseudo_variance(it, mb),
               "m_of_mbar": lambda mb: mean_map_inverse(it, mb),
               "mean_map": lambda m: mean_map(it, m)}
        xname = "m" if args.quantity == "mean_map" else "mbar"
        rows = _table_rows(xname, args.quantity, xs, fns[args.quantity])
        _emit_rows(rows, [xname, args.quantity, "reason"], args.format, out)
        return EXIT_OK
    info = {"law": law.spec, "m1": it.m1, "theta1": it.theta1,
            "mbar0": it.mbar0, "mbar_plus": it.mbar_plus}
    if args.mbar is not None:
        info["mbar"] = args.mbar
        info["m"] = mean_map_inverse(it, args.mbar)
        info["pv1"] = iterated_pseudo_variance(it, args.mbar)
        info["v1"] = iterated_variance(it, args.mbar)
    if args.domain and args.mbar is None:
        info = {"mbar0": it.mbar0, "mbar_plus": it.mbar_plus}
    if args.format == "json":
        json.dump({k: (_num(v) if not isinstance(v, str) else v)
                   for k, v in info.items()}, out, indent=1)
        out.write("\n")
    elif args.domain and args.mbar is None:
        out.write(f"({_text(it.mbar0)}, {_text(it.mbar_plus)})\n")
    else:
        for k, v in info.items():
            out.write(f"{k}: {_text(v) if not isinstance(v, str) else v}\n")
    return EXIT_OK

def cmd_verify(args, out):
    report = verify(law_from_spec(args.law), args.suite, args.tol, _config(args), args.m1)
    if args.format == "json":
        data = report.to_dict()
        for c in data["checks"]:
            c["residual"], c["tolerance"] = _num(c["residual"]), _num(c["tolerance"])
        json.dump(data, out, indent=1)
        out.write("\n")
    else:
        for c in report.checks:
            note = f"  # {c.note}" if c.note else ""
            out.write(f"{c.status.upper():4} {c.name}  residual={_text(c.residual)} "
                      f"tol={_text(c.tolerance)}{note}\n")
        n_pass = sum(c.status == "pass" for c in report.checks)
        out.write(f"{n_pass}/{len(report.checks)} checks passed for {report.law_spec} "
                  f"in {report.wall_time_ms} ms\n")
    if report.passed:
        return EXIT_OK
    return EXIT_NUMERIC if report.numeric_failure else EXIT_FAIL

# ---------------------------------------------------------------------------
# parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--json", dest="format", action="store_const", const="json",
                        help="alias for --format json")
    common.add_argument("--rel-tol", type=float, default=None,
                        help="quadrature relative tolerance (default $CSK_QUAD_RELTOL or 1e-10)")
    common.add_argument("--max-subdiv", type=int, default=None,
                        help="quadrature subdivision budget")

    parser = argparse.ArgumentParser(prog="csk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("laws", parents=[common], help="list the law catalog")
    p.add_argument("--filter", choices=("atom",), default=None)
    p.set_defaults(func=cmd_laws)

    law_args = argparse.ArgumentParser(add_help=False)
    law_args.add_argument("--law", required=True, help="law spec, e.g. mp:a=0.5")
    law_args.add_argument("--method", choices=("auto", "quad"), default="auto",
                          help="closed forms when available, or quadrature only")

    p = sub.add_parser("describe", parents=[common, law_args],
                       help="support bounds, domain of means and extension bounds")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("table", parents=[common, law_args], help="tabulate a quantity")
    p.add_argument("--quantity", required=True, choices=sorted(QUANTITIES))
    p.add_argument("--grid", required=True, help="a:step:b (inclusive)")
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--m1", type=float, default=None)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", parents=[common, law_args], help="run a verification suite")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--tol", type=float, default=None,
                   help="override every positive tolerance")
    p.add_argument("--m1", type=float, default=None, help="member used by the iterate suite")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("iterate", parents=[common, law_args],
                       help="iterated family generated by Q_{m1}")
    p.add_argument("--m1", type=float, required=True)
    p.add_argument("--domain", action="store_true", help="print only the iterated domain")
    p.add_argument("--quantity", choices=("v1", "pv1", "mean_map", "m_of_mbar"))
    p.add_argument("--grid", default=None)
    p.add_argument("--mbar", type=float, default=None)
    p.set_defaults(func=cmd_iterate)
    return parser

_VALUE_FLAGS = ("--grid", "--m", "--m1", "--mbar", "--tol", "--rel-tol")

def _glue_negative_values(argv):
    """Turn ``--grid -0.4:0.1:1`` into ``--grid=-0.4:0.1:1`` so argparse accepts it."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out

def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    try:
        return args.func(args, out)
    except (SpecError, DomainError) as exc:
        print(f"csk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"csk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CskError as exc:
        print(f"csk: error: {exc}", file=sys.stderr)
        return EXIT_FAIL

if __name__ == "__main__":
    sys.exit(main())
