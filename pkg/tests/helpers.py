"""Shared oracles and random-system generators for the test suite."""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from hopfbeb.model import HalfSystemCoefficients, PWLFilippovSystem


def affine_rhs(sys, side):
    c = sys.half(side)

    def rhs(t, z):
        x, y = z
        return [c.a1 * x + c.a2 * y + c.a3 * sys.mu, c.b1 * x + c.b2 * y + c.b3 * sys.mu]

    return rhs


def oracle_flow(sys, side, t, x, y):
    """High-accuracy adaptive integration of one half-system (no switching)."""
    if t == 0:
        return x, y
    sol = solve_ivp(affine_rhs(sys, side), (0.0, t), [x, y], method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[0, -1], sol.y[1, -1]


def oracle_return(sys, side, q, t_max=200.0):
    """(P, T) of the first return to x = 0 from (0, q) through half ``side``, by event detection."""

    def hit(t, z):
        return z[0]

    hit.terminal = True
    hit.direction = -1 if side == "R" else 1
    sol = solve_ivp(affine_rhs(sys, side), (0.0, t_max), [0.0, q], method="DOP853",
                    rtol=1e-13, atol=1e-14, events=hit)
    if sol.t_events[0].size == 0:
        raise RuntimeError("no return within t_max")
    return float(sol.y_events[0][0][1]), float(sol.t_events[0][0])


def theorem_regime_system(rng: np.random.Generator, mu=1.0, clockwise=True) -> PWLFilippovSystem:
    """Random system meeting every hypothesis of the unique-cycle theorem."""
    sign = 1.0 if clockwise else -1.0

    def half(lam_sign):
        a2 = sign * rng.uniform(0.3, 3.0)
        lam = lam_sign * rng.uniform(0.02, 0.8)
        diff = rng.uniform(-2.0, 2.0)  # a1 - b2
        a1, b2 = lam + diff / 2, lam - diff / 2
        om2 = rng.uniform(0.2, 3.0)
        b1 = -(om2 + diff * diff / 4) / a2
        beta = rng.uniform(0.05, 2.0)
        a3 = rng.uniform(-2.0, 2.0)
        b3 = (a3 * b2 - beta) / a2
        return [a1, a2, a3, b1, b2, b3]

    left, right = half(+1), half(-1)
    # gamma = a2L a3R - a3L a2R with a2L*gamma >= 0: move a3R, keeping beta_R > 0 by moving b3R too
    a2l, a3l, a2r = left[1], left[2], right[1]
    a3r = (a3l * a2r + sign * rng.uniform(0.01, 2.0)) / a2l
    beta_r = right[2] * right[4] - right[1] * right[5]
    right[2] = a3r
    right[5] = (a3r * right[4] - beta_r) / right[1]
    return PWLFilippovSystem(HalfSystemCoefficients.from_values(*left),
                             HalfSystemCoefficients.from_values(*right), mu, name="random")


def random_same_rotation_system(rng: np.random.Generator) -> PWLFilippovSystem:
    sign = rng.choice([-1.0, 1.0])
    vals = []
    for _ in range(2):
        a1, a3, b1, b2, b3 = rng.uniform(-3, 3, size=5)
        a2 = sign * rng.uniform(0.1, 3.0)
        vals.append([a1, a2, a3, b1, b2, b3])
    mu = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 5.0)
    return PWLFilippovSystem(HalfSystemCoefficients.from_values(*vals[0]),
                             HalfSystemCoefficients.from_values(*vals[1]), mu, name="random")


def count_sign_changes(values: np.ndarray) -> int:
    """Sign changes along a sampled curve, skipping exact zeros."""
    s = np.sign(values)
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))
