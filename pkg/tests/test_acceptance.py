"""Acceptance criteria, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL] criterion N: ...`` line (also collected
into the pytest terminal summary) and then asserts.
"""
import math
import time
from fractions import Fraction

import numpy as np

from conftest import CRITERIA_LINES
from helpers import count_sign_changes, oracle_return, random_same_rotation_system, theorem_regime_system
from hopfbeb.classify import sliding_region
from hopfbeb.halfmaps import composed_map, half_map_left, half_map_right, rho, side_data
from hopfbeb.limit_cycles import certify_cycle, find_fixed_points
from hopfbeb.model import builtin, eigen_structure
from hopfbeb.sim import half_return, numeric_poincare
from hopfbeb.sliding import PseudoCase, SlidingField, proposition_quantities, pseudo_equilibria


def report(n: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    print(line)
    CRITERIA_LINES.append(line)
    assert ok, line


def best_time(fn, repeats=20):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def test_criterion_01_alpha():
    ex2, ex3 = builtin("ex2"), builtin("ex3")
    a2, a3 = eigen_structure(ex2).alpha, eigen_structure(ex3).alpha
    t2, t3 = best_time(lambda: eigen_structure(ex2)), best_time(lambda: eigen_structure(ex3))
    ok = a2 == float(Fraction(-9, 50)) and abs(a3 + 0.63) < 0.01 and t2 < 1e-3 and t3 < 1e-3
    report(1, ok, f"alpha(ex2) = {a2!r}, alpha(ex3) = {a3:.5f}, runtimes {t2 * 1e3:.3f} ms / {t3 * 1e3:.3f} ms")


def test_criterion_02_proposition_numbers():
    c, d_l, d_r, Q = proposition_quantities(builtin("ex3"))
    c1, *_ = proposition_quantities(builtin("ex1"))
    counts = {}
    for name in ("ex1", "ex3"):
        for mu in (-1, 1):
            s = builtin(name, mu=mu)
            lo, hi = sliding_region(s).interval
            scanned = count_sign_changes(SlidingField(s).numerator(np.linspace(lo, hi, 10001)))
            counts[name, mu] = (len(pseudo_equilibria(s).admissible_roots), scanned)
    ok = (c == Fraction(12, 25) and d_l == d_r == Fraction(1, 10) and abs(float(Q) - 0.0384) <= 1e-12
          and c1 == -2 * Fraction(1, 20)
          and all(counts["ex3", m] == (2, 2) for m in (-1, 1))
          and all(counts["ex1", m] == (0, 0) for m in (-1, 1)))
    report(2, ok, f"ex3 c={c}, d_L={d_l}, d_R={d_r}, Q={float(Q)!r}; ex1 c={c1}; "
                  f"(reported, scanned) root counts {counts}")


def test_criterion_03_theorem_regime():
    parts, ok = [], True
    for name in ("ex1", "ex3"):
        s = builtin(name, mu=1)
        t0 = time.perf_counter()
        fps = find_fixed_points(s)
        cert = certify_cycle(s, fps[0].y) if len(fps) == 1 else None
        elapsed = time.perf_counter() - t0
        neg = find_fixed_points(builtin(name, mu=-1))
        good = (len(fps) == 1 and abs(fps[0].dP_dq) < 1 and cert is not None
                and cert.max_residual <= 1e-9 and neg == [] and elapsed < 1.0)
        ok &= good
        parts.append(f"{name}: {len(fps)} fixed point(s), dP/dq = {fps[0].dP_dq:.4f}, "
                     f"max residual {cert.max_residual:.1e}, mu=-1 count {len(neg)}, {elapsed:.3f} s")
    report(3, ok, "; ".join(parts))


def test_criterion_04_three_nested_cycles():
    t0 = time.perf_counter()
    fps = find_fixed_points(builtin("ex2", mu=1))
    elapsed = time.perf_counter() - t0
    neg = find_fixed_points(builtin("ex2", mu=-1))
    stab = [f.stability for f in fps]
    ok = stab == ["stable", "unstable", "stable"] and neg == [] and elapsed < 10
    report(4, ok, f"ex2 mu=1 cycles at y = {[round(float(f.y), 6) for f in fps]} with {stab}; "
                  f"mu=-1 count {len(neg)}; {elapsed:.2f} s")


def test_criterion_05_oracle_equivalence():
    worst = {}
    for name in ("ex1", "ex3"):
        s = builtin(name, mu=1)
        zr, zl = side_data(s, "R").zeta, side_data(s, "L").zeta
        q_r = zr + np.geomspace(1e-2, 1e2, 64)
        q_l = zl - np.geomspace(1e-2, 1e2, 64)
        pr, pl, pc = half_map_right(s, q_r).p, half_map_left(s, q_l).p, composed_map(s, q_r).p
        worst[name, "P_R"] = max(abs(half_return(s, "R", q)[0] - p) for q, p in zip(q_r, pr))
        worst[name, "P_L"] = max(abs(half_return(s, "L", q)[0] - p) for q, p in zip(q_l, pl))
        worst[name, "P"] = max(abs(numeric_poincare(s, q)[0] - p) for q, p in zip(q_r, pc))
        # second, independent route: adaptive integration with event location
        adaptive = worst.setdefault("adaptive", 0.0)
        for q, a, b in zip(q_r, pr, pc):
            r = oracle_return(s, "R", q)[0]
            adaptive = max(adaptive, abs(r - a), abs(oracle_return(s, "L", r)[0] - b))
        for q, p in zip(q_l, pl):
            adaptive = max(adaptive, abs(oracle_return(s, "L", q)[0] - p))
        worst["adaptive"] = adaptive
    ok = max(worst.values()) <= 1e-8
    report(5, ok, "max |analytic - simulated| " + ", ".join(
        f"{' '.join(k) if isinstance(k, tuple) else k}: {v:.1e}" for k, v in worst.items()))


def test_criterion_06_asymptotics():
    s = builtin("ex1", mu=1)
    e = eigen_structure(s)
    q = 1e6
    errs = {
        "P_R": abs(half_map_right(s, q).p / q / -math.exp(e.lambda_R * math.pi / e.omega_R) - 1),
        "P_L": abs(half_map_left(s, -q).p / -q / -math.exp(e.lambda_L * math.pi / e.omega_L) - 1),
        "P": abs(composed_map(s, q).p / q / math.exp(e.alpha * math.pi) - 1),
    }
    report(6, max(errs.values()) <= 1e-3, "relative errors at |q| = 1e6: "
           + ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))


def test_criterion_07_rho_identity():
    s = np.linspace(0.05, math.pi - 0.05, 50)
    nus = np.linspace(-3, 3, 50)
    h = 1e-5

    def lhs(x, nu):
        return np.exp(-nu * x) * rho(x, nu) / np.sin(x)

    worst = 0.0
    for nu in nus:
        fd = (lhs(s + h, nu) - lhs(s - h, nu)) / (2 * h)
        exact = rho(s, -nu) / np.sin(s) ** 2
        worst = max(worst, float(np.max(np.abs(fd - exact) / np.maximum(1.0, np.abs(exact)))))
    report(7, worst <= 1e-6, f"max scaled finite-difference error on 50x50 grid {worst:.1e}")


def test_criterion_08_mu_scaling():
    certs = {}
    for mu in (1, 2, 4):
        s = builtin("ex1", mu=mu)
        fps = find_fixed_points(s)
        certs[mu] = certify_cycle(s, fps[0].y)
    base = certs[1]
    worst_y = max(max(abs(c.y_R / (mu * base.y_R) - 1), abs(c.y_L / (mu * base.y_L) - 1))
                  for mu, c in certs.items())
    worst_t = max(max(abs(c.t_R / base.t_R - 1), abs(c.t_L / base.t_L - 1)) for c in certs.values())
    report(8, worst_y <= 1e-9 and worst_t <= 1e-9,
           f"max relative deviation: ordinates {worst_y:.1e}, times {worst_t:.1e}")


def test_criterion_09_sliding_kind():
    rng = np.random.default_rng(2024)
    mismatches = 0
    kinds = {"attracting": 0, "repelling": 0, "none": 0}
    for _ in range(1000):
        s = random_same_rotation_system(rng)
        region = sliding_region(s)
        mid = 0.5 * (region.zeta_L + region.zeta_R)
        fl, fr = s.f("L", 0.0, mid), s.f("R", 0.0, mid)
        direct = "attracting" if fl > 0 > fr else "repelling" if fl < 0 < fr else "none"
        kinds[region.kind] += 1
        mismatches += region.kind != direct
    report(9, mismatches == 0, f"1000 draws, {mismatches} mismatches, kinds {kinds}")


def test_criterion_10_quadratic_reduction():
    rng = np.random.default_rng(10)
    expected = {PseudoCase.NONE: 0, PseudoCase.ONE: 1, PseudoCase.TWO: 2}
    mismatches = 0
    cases = {}
    for _ in range(500):
        s = theorem_regime_system(rng)
        case = pseudo_equilibria(s).case
        cases[case] = cases.get(case, 0) + 1
        lo, hi = sliding_region(s).interval
        found = count_sign_changes(SlidingField(s).numerator(np.linspace(lo, hi, 10000)))
        mismatches += found != expected[case]
    report(10, mismatches == 0, f"500 theorem-regime draws, {mismatches} mismatches, cases {cases}")
