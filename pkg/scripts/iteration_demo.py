"""Iterate a family numerically and compare v1 with the closed form.

Usage: python3 scripts/iteration_demo.py --law free_abel --m1 -1
"""

import argparse

import numpy as np

from csk import build_family, iterate_family, iterated_variance, law_from_spec
from csk.iterate import cubic_closed_forms, quadratic_closed_forms

# coefficients of V = 1 + a m + b m^2 (quadratic) or V = m (a m^2 + b m + c) (cubic)
FORMS = {
    "semicircle": ("quadratic", (0.0, 0.0)),
    "marchenko_pastur": ("quadratic", None),
    "free_abel": ("cubic", (1.0, -1.0, 0.0)),
    "free_ressel": ("cubic", (1.0, 1.0, 0.0)),
    "free_strict_arcsine": ("cubic", (1.0, 0.0, 1.0)),
    "inverse_semicircle": ("cubic", None),
}


def closed_v1(law, m1):
    kind, coeffs = FORMS[law.name]
    if law.name == "marchenko_pastur":
        coeffs = (law.parameters["a"], 0.0)
    elif law.name == "inverse_semicircle":
        coeffs = (1.0 / law.parameters["p"] ** 2, 0.0, 0.0)
    if kind == "quadratic":
        return quadratic_closed_forms(*coeffs, m1).v1
    return cubic_closed_forms(*coeffs, m1).v1


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--law", default="semicircle")
    parser.add_argument("--m1", type=float, default=0.5)
    parser.add_argument("--points", type=int, default=10)
    args = parser.parse_args()

    law = law_from_spec(args.law)
    it = iterate_family(build_family(law, method="quad"), args.m1)
    v1 = closed_v1(law, args.m1)
    print(f"iterated domain: ({it.mbar0:.12g}, {it.mbar_plus:.12g})")
    print(f"{'mbar':>14} {'numeric v1':>22} {'closed v1':>22} {'abs err':>10}")
    for mb in np.linspace(it.mbar0, it.mbar_plus, args.points + 2)[1:-1]:
        got, want = iterated_variance(it, mb), v1(mb)
        print(f"{mb:14.8f} {got:22.15g} {want:22.15g} {abs(got - want):10.2e}")


if __name__ == "__main__":
    main()
