#!/usr/bin/env python3
"""How often each pseudo-equilibrium case occurs, and whether the case rule matches root counting.

Draws systems with positive betas and a common rotation sense, applies the
c / d_L / d_R / Q case rule and counts sign changes of the sliding numerator
on the sliding segment at mu = +1 and mu = -1.
"""
import argparse
import collections

import numpy as np

from hopfbeb.classify import sliding_region
from hopfbeb.model import HalfSystemCoefficients, PWLFilippovSystem
from hopfbeb.sliding import PseudoCase, SlidingField, pseudo_equilibria

EXPECTED = {PseudoCase.NONE: 0, PseudoCase.ONE: 1, PseudoCase.TWO: 2}


def draw(rng):
    sign = rng.choice([-1.0, 1.0])
    while True:
        vals = []
        for _ in range(2):
            a1, a3, b1, b2, b3 = rng.uniform(-3, 3, size=5)
            vals.append([a1, sign * rng.uniform(0.1, 3.0), a3, b1, b2, b3])
        s = PWLFilippovSystem(HalfSystemCoefficients.from_values(*vals[0]),
                              HalfSystemCoefficients.from_values(*vals[1]), 1.0, name="draw")
        if s.left.beta > 0 and s.right.beta > 0:
            return s


def sign_changes(v):
    s = np.sign(v)
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=10000)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    tally = collections.Counter()
    mismatches = 0
    for _ in range(args.n):
        s = draw(rng)
        case = pseudo_equilibria(s).case
        tally[case] += 1
        for mu in (1.0, -1.0):
            sm = s.with_mu(mu)
            lo, hi = sliding_region(sm).interval
            found = sign_changes(SlidingField(sm).numerator(np.linspace(lo, hi, args.points)))
            mismatches += found != EXPECTED[case]
    total = sum(tally.values())
    for case, n in sorted(tally.items()):
        print(f"{case:>12}: {n:6d}  ({100 * n / total:.1f} %)")
    print(f"case rule vs root count mismatches: {mismatches}")


if __name__ == "__main__":
    main()
