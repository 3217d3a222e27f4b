"""Run every verification suite over the law catalog and summarise the results.

Usage: python3 scripts/verify_catalog.py [--suite all] [--out report.json]
"""

import argparse
import json

from csk import law_from_spec, verify
from csk.verify import SUITES

SPECS = ("semicircle", "mp:a=0.5", "mp:a=-2", "free_abel", "free_ressel",
         "arcsine", "isc:p=1", "bernoulli")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--suite", choices=SUITES, default="all")
    parser.add_argument("--out", default=None, help="write the full reports as JSON")
    args = parser.parse_args()

    reports, failed = [], 0
    for spec in SPECS:
        report = verify(law_from_spec(spec), args.suite)
        reports.append(report.to_dict())
        n_pass = sum(c.status == "pass" for c in report.checks)
        worst = max((c.residual / c.tolerance for c in report.checks
                     if c.tolerance > 0), default=0.0)
        print(f"{spec:22s} {n_pass:3d}/{len(report.checks):<3d} "
              f"worst residual/tol={worst:.2e} {report.wall_time_ms:6d} ms")
        failed += not report.passed
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(reports, fh, indent=1)
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
