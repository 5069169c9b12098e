"""Equilibria, folds, sliding regions and the unique-cycle theorem check."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .model import AnalysisError, PWLFilippovSystem, eigen_structure


@dataclass(frozen=True)
class EquilibriumInfo:
    x_star: float
    y_star: float
    side: str
    admissible: bool
    beta: float
    boundary: bool = False  # mu = 0: the equilibrium sits on x = 0


@dataclass(frozen=True)
class SlidingRegionInfo:
    exists: bool
    zeta_L: float
    zeta_R: float
    kind: str  # "attracting" | "repelling" | "none"
    gamma: float

    @property
    def interval(self) -> tuple[float, float]:
        return min(self.zeta_L, self.zeta_R), max(self.zeta_L, self.zeta_R)


class Prediction:
    STABLE_CYCLE_MU_POS = "stable_cycle_for_mu_pos"
    UNSTABLE_CYCLE_MU_NEG = "unstable_cycle_for_mu_neg"
    DEGENERATE = "degenerate_alpha_zero"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class TheoremVerdict:
    hypotheses: dict
    prediction: str
    alpha: float | None
    notes: tuple = field(default=())

    @property
    def holds(self) -> bool:
        return all(self.hypotheses.values())


def gamma_exact(sys: PWLFilippovSystem) -> Fraction:
    a2l, a3l = sys.left.exact[1], sys.left.exact[2]
    a2r, a3r = sys.right.exact[1], sys.right.exact[2]
    return a2l * a3r - a3l * a2r


def gamma(sys: PWLFilippovSystem) -> float:
    return float(gamma_exact(sys))


def beta(sys: PWLFilippovSystem, side: str) -> float:
    return float(sys.half(side).beta)


def fold_exact(sys: PWLFilippovSystem, side: str) -> Fraction:
    c = sys.half(side)
    if c.exact[1] == 0:
        raise AnalysisError(f"a2 = 0 on the {side} side: fold undefined")
    return -c.exact[2] * sys.mu_exact / c.exact[1]


def fold(sys: PWLFilippovSystem, side: str) -> float:
    """Ordinate zeta_J = -a3J*mu/a2J where F_J is tangent to x = 0."""
    return float(fold_exact(sys, side))


def _equilibrium(sys: PWLFilippovSystem, side: str) -> EquilibriumInfo:
    c = sys.half(side)
    det = c.det
    if det == 0:
        raise AnalysisError(f"singular Jacobian on the {side} side")
    a1, a2, a3, b1, b2, b3 = c.exact
    mu = sys.mu_exact
    # -A^{-1} (a3, b3)^T mu, via the adjugate
    x = -(b2 * a3 - a2 * b3) * mu / det
    y = -(-b1 * a3 + a1 * b3) * mu / det
    if mu == 0:
        admissible, boundary = False, True
    else:
        admissible = x < 0 if side == "L" else x > 0
        boundary = False
    return EquilibriumInfo(float(x), float(y), side, admissible, float(c.beta), boundary)


def equilibria(sys: PWLFilippovSystem) -> tuple[EquilibriumInfo, EquilibriumInfo]:
    """Left and right equilibria with their admissibility.

    At mu = 0 both sit at the origin on the switching line and are flagged
    ``boundary`` and non-admissible.
    """
    return _equilibrium(sys, "L"), _equilibrium(sys, "R")


def sliding_region(sys: PWLFilippovSystem) -> SlidingRegionInfo:
    a2l, a2r = sys.left.exact[1], sys.right.exact[1]
    if a2l == 0 or a2r == 0:
        raise AnalysisError("a2 = 0 on one side: fold undefined")
    if a2l * a2r < 0:
        raise AnalysisError("opposite rotation senses (a2L*a2R < 0) give unbounded sliding sets")
    zl, zr = fold(sys, "L"), fold(sys, "R")
    g = gamma_exact(sys)
    sign = a2l * g * sys.mu_exact
    if g == 0 or sys.mu_exact == 0:
        kind = "none"
    else:
        kind = "attracting" if sign < 0 else "repelling"
    return SlidingRegionInfo(kind != "none", zl, zr, kind, float(g))


def theorem_verdict(sys: PWLFilippovSystem) -> TheoremVerdict:
    """Check the hypotheses of the focus-focus unique-cycle theorem."""
    notes = []
    try:
        eig = eigen_structure(sys)
        focus = eig.lambda_L > 0 and eig.lambda_R < 0
        alpha = eig.alpha
        if not focus:
            notes.append("eigenvalues present but not (unstable left, stable right) foci")
    except AnalysisError as exc:
        focus, alpha = False, None
        notes.append(str(exc))
    bl, br = sys.left.beta, sys.right.beta
    a2l, a2r = sys.left.exact[1], sys.right.exact[1]
    g = gamma_exact(sys)
    hyp = {
        "focus_focus": focus,
        "beta_L_pos": bl > 0,
        "beta_R_pos": br > 0,
        "same_rotation": a2l * a2r > 0,
        "gamma_sign_ok": a2l * g >= 0,
    }
    if g == 0:
        notes.append("boundary: gamma = 0 (no sliding region)")
    for name, val in (("beta_L", bl), ("beta_R", br)):
        if val == 0:
            notes.append(f"boundary: {name} = 0")
    if not all(hyp.values()) or alpha is None:
        pred = Prediction.NOT_APPLICABLE
    elif alpha < 0:
        pred = Prediction.STABLE_CYCLE_MU_POS
    elif alpha > 0:
        pred = Prediction.UNSTABLE_CYCLE_MU_NEG
    else:
        pred = Prediction.DEGENERATE
        notes.append("degenerate (alpha = 0): no cycle prediction")
    return TheoremVerdict(hyp, pred, alpha, tuple(notes))


def continuity_check(sys: PWLFilippovSystem) -> tuple[bool, str]:
    """True when F_L and F_R agree on x = 0 for every y and mu."""
    l, r = sys.left.exact, sys.right.exact
    names = {1: "a2", 2: "a3", 4: "b2", 5: "b3"}
    diffs = [n for i, n in names.items() if l[i] != r[i]]
    if diffs:
        return False, "discontinuous on x=0: " + ", ".join(f"{n}L != {n}R" for n in diffs)
    return True, "continuous on x=0: gamma = 0, no sliding; continuous Hopf-like case"


def classification_report(sys: PWLFilippovSystem) -> dict:
    """All named classification quantities as plain JSON-ready values."""
    eq_l, eq_r = equilibria(sys)
    region = sliding_region(sys)
    verdict = theorem_verdict(sys)
    cont, cont_msg = continuity_check(sys)
    try:
        eig = asdict(eigen_structure(sys))
    except AnalysisError as exc:
        eig = {"error": str(exc)}
    return {
        "name": sys.name,
        "mu": sys.mu,
        "beta_L": float(sys.left.beta),
        "beta_R": float(sys.right.beta),
        "gamma": region.gamma,
        "alpha": verdict.alpha,
        "zeta_L": region.zeta_L,
        "zeta_R": region.zeta_R,
        "kind": region.kind,
        "sliding_exists": region.exists,
        "eigen": eig,
        "equilibria": [asdict(eq_l), asdict(eq_r)],
        "hypotheses": dict(verdict.hypotheses),
        "prediction": verdict.prediction,
        "continuous": cont,
        "continuity": cont_msg,
        "notes": list(verdict.notes),
    }
