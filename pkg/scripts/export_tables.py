"""Export CSV tables of v, V and atom weights for plotting.

Usage: python3 scripts/export_tables.py --outdir tables
"""

import argparse
import csv
import math
import os

import numpy as np

from csk import atom_weight, build_family, extend_family, law_from_spec
from csk.errors import DomainError

SPECS = ("semicircle", "mp:a=0.5", "free_abel", "free_ressel", "arcsine", "isc:p=1")


def pseudo_variance_rows(spec, n):
    fam = build_family(law_from_spec(spec), method="quad")
    hi = fam.m_plus
    lo = fam.m0 if math.isfinite(fam.m0) else hi - 6 * max(1.0, abs(hi))
    for m in np.linspace(lo, hi, n + 2)[1:-1]:
        yield {"m": m, "pv": m * fam.inverted_pv_over_m(m)}


def atom_rows(spec, n):
    fam = build_family(law_from_spec(spec))
    ext = extend_family(fam)
    top = ext.M_plus_bold if math.isfinite(ext.M_plus_bold) else fam.m_plus + 5
    for m in np.linspace(fam.m_plus, top, n + 2)[1:-1]:
        try:
            yield {"m": m, "atom_weight": atom_weight(fam, m)}
        except DomainError:
            yield {"m": m, "atom_weight": None}


def write(path, rows):
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("null" if v is None else format(v, ".17g"))
                             for k, v in r.items()})


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="tables")
    parser.add_argument("--points", type=int, default=50)
    args = parser.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    for spec in SPECS:
        stem = spec.replace(":", "_").replace("=", "")
        write(os.path.join(args.outdir, f"{stem}_pv.csv"), pseudo_variance_rows(spec, args.points))
        write(os.path.join(args.outdir, f"{stem}_atom.csv"), atom_rows(spec, args.points))
        print(f"wrote tables for {spec}")


if __name__ == "__main__":
    main()
