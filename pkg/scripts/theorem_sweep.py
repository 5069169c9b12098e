#!/usr/bin/env python3
"""Random systems in the unique-cycle regime: compare cycle counts with the alpha prediction.

For each draw the fixed points of the return map are located at mu = +1 and
mu = -1.  The expected outcome is one stable cycle for mu > 0 when alpha < 0,
one unstable cycle for mu < 0 when alpha > 0, and nothing on the other side.
Pseudo-equilibrium case frequencies are tallied along the way.
"""
import argparse
import collections
import time

import numpy as np

from hopfbeb.classify import theorem_verdict
from hopfbeb.limit_cycles import find_fixed_points
from hopfbeb.model import HalfSystemCoefficients, PWLFilippovSystem
from hopfbeb.sliding import pseudo_equilibria


def draw(rng: np.random.Generator) -> PWLFilippovSystem:
    """Clockwise foci, unstable on the left and stable on the right, positive betas, a2L*gamma >= 0."""

    def half(lam_sign):
        a2 = rng.uniform(0.3, 3.0)
        lam = lam_sign * rng.uniform(0.02, 0.8)
        diff = rng.uniform(-2.0, 2.0)
        a1, b2 = lam + diff / 2, lam - diff / 2
        b1 = -(rng.uniform(0.2, 3.0) + diff * diff / 4) / a2
        beta = rng.uniform(0.05, 2.0)
        a3 = rng.uniform(-2.0, 2.0)
        return [a1, a2, a3, b1, b2, (a3 * b2 - beta) / a2]

    left, right = half(+1), half(-1)
    beta_r = right[2] * right[4] - right[1] * right[5]
    right[2] = (left[2] * right[1] + rng.uniform(0.01, 2.0)) / left[1]
    right[5] = (right[2] * right[4] - beta_r) / right[1]
    return PWLFilippovSystem(HalfSystemCoefficients.from_values(*left),
                             HalfSystemCoefficients.from_values(*right), 1.0, name="draw")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--q-max", type=float, default=None, help="dimensionless scan limit")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    outcomes = collections.Counter()
    cases = collections.Counter()
    failures = []
    t0 = time.perf_counter()
    for i in range(args.n):
        s = draw(rng)
        v = theorem_verdict(s)
        pos = find_fixed_points(s.with_mu(1.0), args.q_max)
        neg = find_fixed_points(s.with_mu(-1.0), args.q_max)
        cases[pseudo_equilibria(s).case] += 1
        if v.alpha < 0:
            ok = len(pos) == 1 and pos[0].stability == "stable" and not neg
            outcomes["alpha<0"] += 1
        else:
            ok = len(neg) == 1 and neg[0].stability == "unstable" and not pos
            outcomes["alpha>0"] += 1
        if not ok:
            failures.append((i, v.alpha, [f.stability for f in pos], [f.stability for f in neg]))
    elapsed = time.perf_counter() - t0

    print(f"{args.n} draws in {elapsed:.1f} s: {dict(outcomes)}")
    print(f"pseudo-equilibrium cases: {dict(cases)}")
    print(f"draws contradicting the prediction: {len(failures)}")
    for f in failures[:10]:
        print("  ", f)


if __name__ == "__main__":
    main()
