"""Filippov sliding vector field and pseudo-equilibria on x = 0."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .classify import fold_exact, gamma_exact, sliding_region
from .model import AnalysisError, PWLFilippovSystem

BOUNDARY_TOL = 1e-10


class PseudoCase:
    NONE = "none_all_mu"
    ONE = "one_per_mu"
    TWO = "two_per_mu"


@dataclass(frozen=True)
class SlidingField:
    """g_slide(y) = (f_L g_R - f_R g_L)/(f_L - f_R) on x = 0 and theta(y) = f_L/(f_L - f_R)."""

    sys: PWLFilippovSystem

    def parts(self, y):
        s = self.sys
        return s.f("L", 0.0, y), s.g("L", 0.0, y), s.f("R", 0.0, y), s.g("R", 0.0, y)

    def numerator(self, y):
        fl, gl, fr, gr = self.parts(y)
        return fl * gr - fr * gl

    def __call__(self, y):
        fl, gl, fr, gr = self.parts(y)
        return (fl * gr - fr * gl) / (fl - fr)

    def theta(self, y):
        fl, _, fr, _ = self.parts(y)
        return fl / (fl - fr)


@dataclass(frozen=True)
class PseudoRoot:
    y: float
    admissible: bool
    stability_1d: str  # "stable" | "unstable" | "degenerate" | "n/a"
    boundary: bool = False
    # planar stability: a repelling sliding region makes every pseudo-equilibrium unstable
    stability: str = "n/a"


@dataclass(frozen=True)
class PseudoEquilibriumReport:
    c: float
    d_L: float
    d_R: float
    Q: float
    roots: tuple
    case: str | None
    notes: tuple = field(default=())

    @property
    def admissible_roots(self) -> list:
        return [r for r in self.roots if r.admissible]


def sliding_field_eval(sys: PWLFilippovSystem, y: float) -> tuple[float, float]:
    """(g_slide(y), theta(y)) for y in the closed sliding region."""
    region = sliding_region(sys)
    if not region.exists:
        raise AnalysisError("no sliding region for this system and mu")
    lo, hi = region.interval
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    if not (lo - tol <= y <= hi + tol):
        raise AnalysisError(f"y = {y!r} lies outside the sliding region [{lo!r}, {hi!r}]")
    sf = SlidingField(sys)
    fl, _, fr, _ = sf.parts(y)
    if fl == fr:
        raise AnalysisError("f_L = f_R: sliding field undefined")
    return float(sf(y)), float(sf.theta(y))


def numerator_coefficients(sys: PWLFilippovSystem) -> tuple[Fraction, Fraction, Fraction]:
    """Exact (A, B, C) with h(y) = A y^2 + B y + C = f_L g_R - f_R g_L on x = 0."""
    _, a2l, a3l, _, b2l, b3l = sys.left.exact
    _, a2r, a3r, _, b2r, b3r = sys.right.exact
    m = sys.mu_exact
    A = a2l * b2r - a2r * b2l
    B = m * (a2l * b3r + a3l * b2r - a2r * b3l - a3r * b2l)
    C = m * m * (a3l * b3r - a3r * b3l)
    return A, B, C


def quadratic_roots(A: float, B: float, C: float) -> list[float]:
    """Real roots of A y^2 + B y + C without the classic cancellation."""
    if A == 0:
        if B == 0:
            return []
        return [-C / B]
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    if disc == 0:
        return [-B / (2 * A)]
    qq = -0.5 * (B + math.copysign(math.sqrt(disc), B))
    r1 = qq / A
    r2 = C / qq if qq != 0 else -r1
    return sorted([r1, r2])


def proposition_quantities(sys: PWLFilippovSystem) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """c, d_L, d_R, Q (exact) from the coefficients."""
    a2l, b2l = sys.left.exact[1], sys.left.exact[4]
    a2r, b2r = sys.right.exact[1], sys.right.exact[4]
    g = gamma_exact(sys)
    c = (a2l * b2r - a2r * b2l) * g
    d_l = a2r * a2r * sys.left.beta
    d_r = a2l * a2l * sys.right.beta
    Q = c * c - 2 * (d_l + d_r) * c + (d_l - d_r) ** 2
    return c, d_l, d_r, Q


def predicted_case(c, d_l, d_r, Q) -> str:
    if c <= abs(d_l - d_r) or Q < 0:
        return PseudoCase.NONE
    return PseudoCase.ONE if Q == 0 else PseudoCase.TWO


def pseudo_equilibria(sys: PWLFilippovSystem) -> PseudoEquilibriumReport:
    """Roots of the sliding numerator h(y), their admissibility and 1D stability.

    The case label (none / one / two admissible pseudo-equilibria for every
    mu != 0) follows from c, d_L, d_R, Q and is reported only when
    beta_L, beta_R > 0 and a2L*a2R > 0, where that criterion applies.
    """
    a2l, a2r = sys.left.exact[1], sys.right.exact[1]
    if a2l == 0 or a2r == 0:
        raise AnalysisError("a2 = 0 on one side: folds undefined")
    A, B, C = numerator_coefficients(sys)
    if A == 0 and B == 0 and C == 0:
        raise AnalysisError("sliding numerator h vanishes identically (degenerate)")
    c, d_l, d_r, Q = proposition_quantities(sys)
    notes = []
    if sys.left.beta > 0 and sys.right.beta > 0 and a2l * a2r > 0:
        case = predicted_case(c, d_l, d_r, Q)
    else:
        case = None
        notes.append("case criterion needs beta_L, beta_R > 0 and same rotation; not classified")

    region = sliding_region(sys)
    lo, hi = region.interval
    sf = SlidingField(sys)
    Af, Bf = float(A), float(B)
    roots = []
    for y in quadratic_roots(Af, Bf, float(C)):
        inside = region.exists and lo <= y <= hi
        near = region.exists and min(abs(y - lo), abs(y - hi)) <= BOUNDARY_TOL * max(1.0, abs(lo), abs(hi))
        admissible = inside or near
        stab = "n/a"
        if admissible:
            fl, _, fr, _ = sf.parts(y)
            denom = fl - fr
            slope = (2 * Af * y + Bf) / denom if denom != 0 else math.nan
            if not math.isfinite(slope) or slope == 0:
                stab = "degenerate"
            else:
                stab = "stable" if slope < 0 else "unstable"
        planar = stab
        if stab == "stable" and region.kind == "repelling":
            planar = "unstable"
        roots.append(PseudoRoot(y, admissible, stab, bool(near), planar))
    if any(r.boundary for r in roots):
        notes.append("boundary pseudo-equilibrium: root coincides with a fold")
    return PseudoEquilibriumReport(float(c), float(d_l), float(d_r), float(Q), tuple(roots), case, tuple(notes))


@dataclass(frozen=True)
class NormalizedQuadratic:
    c: float
    d_L: float
    d_R: float

    @property
    def z_crit(self) -> float:
        return (self.d_L - self.d_R) / (2 * self.c)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = 0.5 * (self.c * z * z - (self.d_L - self.d_R) * z + self.d_L + self.d_R - self.c)
        return out if out.ndim else float(out)


def normalized_quadratic(sys: PWLFilippovSystem) -> NormalizedQuadratic:
    """h on the sliding interval mapped to z in [-1, 1] (z = -1 at zeta_L, z = 1 at zeta_R)."""
    g = gamma_exact(sys)
    m = sys.mu_exact
    if g == 0:
        raise AnalysisError("gamma = 0: no sliding interval to normalise")
    if m == 0:
        raise AnalysisError("mu = 0: sliding interval is a point")
    a2l, a2r = sys.left.exact[1], sys.right.exact[1]
    c, d_l, d_r, _ = proposition_quantities(sys)
    den = a2l * a2l * a2r * a2r
    return NormalizedQuadratic(float(c * g * m * m / (2 * den)),
                               float(d_l * g * m * m / den),
                               float(d_r * g * m * m / den))


def tilde_h(sys: PWLFilippovSystem, z):
    return normalized_quadratic(sys)(z)


def map_z_to_y(sys: PWLFilippovSystem, z):
    zl, zr = float(fold_exact(sys, "L")), float(fold_exact(sys, "R"))
    return 0.5 * (zl + zr) - 0.5 * (zl - zr) * np.asarray(z, dtype=float)


def sample_sliding_field(sys: PWLFilippovSystem, n: int = 201) -> list[dict]:
    """g_slide and theta on an evenly spaced grid over the closed sliding region."""
    region = sliding_region(sys)
    if not region.exists:
        return []
    lo, hi = region.interval
    sf = SlidingField(sys)
    ys = np.linspace(lo, hi, n)
    rows = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for y in ys:
            rows.append({"y": float(y), "g_slide": float(sf(y)), "theta": float(sf.theta(y)),
                         "h": float(sf.numerator(y))})
    return rows
