"""Piecewise-linear Filippov systems with a single switching line x = 0.

Each half-plane carries an affine vector field

    x' = a1*x + a2*y + a3*mu
    y' = b1*x + b2*y + b3*mu

(left for x < 0, right for x > 0).  Coefficients are kept as 64-bit floats
for the numerical routines, together with an exact rational mirror so that
scalar invariants (beta, gamma, ...) of rational examples can be formed
without rounding noise and rounded once.
"""
from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping

COEFF_NAMES = ("a1", "a2", "a3", "b1", "b2", "b3")


class ModelError(ValueError):
    """Malformed model input (syntax, missing keys, non-finite values)."""


class AnalysisError(Exception):
    """The system lies outside the class an analysis can handle."""


def to_fraction(value: Any) -> Fraction:
    """Exact rational for a JSON number, a float, or a ``"p/q"`` string.

    Floats are taken at their shortest decimal representation, so ``0.1``
    becomes ``1/10`` and ``float(to_fraction(x)) == x`` always holds.
    """
    if isinstance(value, bool):
        raise ModelError(f"boolean is not a coefficient: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, numbers.Real):
        value = float(value)
        if not math.isfinite(value):
            raise ModelError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                return Fraction(to_fraction_str(num)) / Fraction(to_fraction_str(den))
            return Fraction(to_fraction_str(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"cannot parse number {value!r}: {exc}") from None
    raise ModelError(f"unsupported value type {type(value).__name__}")


def to_fraction_str(text: str) -> str:
    text = text.strip()
    if text.lower() in {"nan", "inf", "-inf", "+inf", "infinity", "-infinity"}:
        raise ValueError("non-finite value")
    return text


@dataclass(frozen=True)
class HalfSystemCoefficients:
    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float
    exact: tuple[Fraction, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        values = self.values()
        for name, v in zip(COEFF_NAMES, values):
            if not math.isfinite(v):
                raise ModelError(f"coefficient {name} is not finite: {v!r}")
        if not self.exact:
            object.__setattr__(self, "exact", tuple(to_fraction(float(v)) for v in values))
        elif len(self.exact) != 6:
            raise ModelError("exact mirror must hold six coefficients")
        for name, v in zip(COEFF_NAMES, values):
            object.__setattr__(self, name, float(v))

    @classmethod
    def from_values(cls, a1, a2, a3, b1, b2, b3) -> "HalfSystemCoefficients":
        """Build from numbers or rational strings, rounding each exactly once."""
        fr = tuple(to_fraction(v) for v in (a1, a2, a3, b1, b2, b3))
        return cls(*(float(f) for f in fr), exact=fr)

    def values(self) -> tuple[float, ...]:
        return (self.a1, self.a2, self.a3, self.b1, self.b2, self.b3)

    @property
    def jacobian(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return ((self.a1, self.a2), (self.b1, self.b2))

    @property
    def trace(self) -> Fraction:
        a1, _, _, _, b2, _ = self.exact
        return a1 + b2

    @property
    def det(self) -> Fraction:
        a1, a2, _, b1, b2, _ = self.exact
        return a1 * b2 - a2 * b1

    @property
    def beta(self) -> Fraction:
        """Transversality coefficient a3*b2 - a2*b3 (exact)."""
        _, a2, a3, _, b2, b3 = self.exact
        return a3 * b2 - a2 * b3

    def discriminant(self) -> Fraction:
        a1, a2, _, b1, b2, _ = self.exact
        return (a1 - b2) ** 2 + 4 * a2 * b1


@dataclass(frozen=True)
class PWLFilippovSystem:
    left: HalfSystemCoefficients
    right: HalfSystemCoefficients
    mu: float
    name: str = "system"
    mu_exact: Fraction | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ModelError(f"mu is not finite: {self.mu!r}")
        if self.mu_exact is None:
            object.__setattr__(self, "mu_exact", to_fraction(float(self.mu)))
        object.__setattr__(self, "mu", float(self.mu))

    def half(self, side: str) -> HalfSystemCoefficients:
        if side in ("L", "left"):
            return self.left
        if side in ("R", "right"):
            return self.right
        raise ValueError(f"unknown side {side!r}")

    def with_mu(self, mu) -> "PWLFilippovSystem":
        fr = to_fraction(mu)
        return replace(self, mu=float(fr), mu_exact=fr)

    def f(self, side: str, x, y):
        c = self.half(side)
        return c.a1 * x + c.a2 * y + c.a3 * self.mu

    def g(self, side: str, x, y):
        c = self.half(side)
        return c.b1 * x + c.b2 * y + c.b3 * self.mu

    def vector_field(self, side: str, x, y):
        return self.f(side, x, y), self.g(side, x, y)


class Rotation:
    CLOCKWISE = "clockwise"
    ANTICLOCKWISE = "anticlockwise"
    MIXED = "mixed"


@dataclass(frozen=True)
class EigenStructure:
    lambda_L: float
    omega_L: float
    lambda_R: float
    omega_R: float
    alpha: float
    rotation: str


def _exact_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def focus_parameters(half: HalfSystemCoefficients, side: str = "") -> tuple[float, float]:
    """Return (lambda, omega) for a half-system with a complex eigenvalue pair.

    Raises AnalysisError when the eigenvalues are real.
    """
    if half.discriminant() >= 0:
        label = f"{side} " if side else ""
        raise AnalysisError(f"{label}half-system has real eigenvalues (not a focus)")
    lam = half.trace / 2
    om2 = -half.discriminant() / 4
    om = _exact_sqrt(om2)
    return float(lam), float(om) if om is not None else math.sqrt(float(om2))


def _exact_ratio(half: HalfSystemCoefficients) -> Fraction | None:
    om = _exact_sqrt(-half.discriminant() / 4)
    return None if om is None else (half.trace / 2) / om


def eigen_structure(sys: PWLFilippovSystem) -> EigenStructure:
    lam_l, om_l = focus_parameters(sys.left, "left")
    lam_r, om_r = focus_parameters(sys.right, "right")
    rl, rr = _exact_ratio(sys.left), _exact_ratio(sys.right)
    if rl is not None and rr is not None:
        alpha = float(rl + rr)
    else:
        alpha = lam_l / om_l + lam_r / om_r
    a2l, a2r = sys.left.a2, sys.right.a2
    if a2l > 0 and a2r > 0:
        rot = Rotation.CLOCKWISE
    elif a2l < 0 and a2r < 0:
        rot = Rotation.ANTICLOCKWISE
    else:
        rot = Rotation.MIXED
    return EigenStructure(lam_l, om_l, lam_r, om_r, alpha, rot)


def scale_state(sys: PWLFilippovSystem, factor) -> PWLFilippovSystem:
    """Rescale (x, y) -> (x/factor, y/factor); only mu changes, to mu/factor."""
    fr = to_fraction(factor)
    if fr <= 0:
        raise ValueError(f"scale factor must be positive, got {factor!r}")
    return sys.with_mu(sys.mu_exact / fr)


def normalize_mu(sys: PWLFilippovSystem) -> tuple[PWLFilippovSystem, float]:
    """Scale so that mu is -1, 0 or 1; returns the system and the factor |mu|."""
    if sys.mu == 0:
        return sys, 1.0
    return scale_state(sys, abs(sys.mu_exact)), abs(sys.mu)


def reflect_y(sys: PWLFilippovSystem) -> PWLFilippovSystem:
    """Conjugate by y -> -y (reverses the sense of rotation)."""

    def flip(c: HalfSystemCoefficients) -> HalfSystemCoefficients:
        a1, a2, a3, b1, b2, b3 = c.exact
        return HalfSystemCoefficients.from_values(a1, -a2, a3, -b1, b2, -b3)

    return replace(sys, left=flip(sys.left), right=flip(sys.right))


def reverse_time(sys: PWLFilippovSystem) -> PWLFilippovSystem:
    """Apply (x, y; mu; t) -> (-x, y; -mu; -t).

    The old right half-system becomes the new left one and vice versa.
    """

    def swap(c: HalfSystemCoefficients) -> HalfSystemCoefficients:
        a1, a2, a3, b1, b2, b3 = c.exact
        return HalfSystemCoefficients.from_values(-a1, a2, -a3, b1, -b2, b3)

    return replace(sys, left=swap(sys.right), right=swap(sys.left),
                   mu=-sys.mu, mu_exact=-sys.mu_exact)


# ---------------------------------------------------------------------------
# model files

def _format_value(v: float, exact: Fraction):
    if exact.denominator == 1 and abs(exact) < 2**53:
        return int(exact)
    if to_fraction(v) == exact:
        return v
    return f"{exact.numerator}/{exact.denominator}"


def _half_from_mapping(obj: Any, label: str) -> HalfSystemCoefficients:
    if not isinstance(obj, Mapping):
        raise ModelError(f"'{label}' must be an object")
    missing = [k for k in COEFF_NAMES if k not in obj]
    if missing:
        raise ModelError(f"'{label}' is missing coefficient(s) {', '.join(missing)}")
    extra = sorted(set(obj) - set(COEFF_NAMES))
    if extra:
        raise ModelError(f"'{label}' has unknown key(s) {', '.join(extra)}")
    return HalfSystemCoefficients.from_values(*(obj[k] for k in COEFF_NAMES))


def model_from_dict(data: Mapping[str, Any]) -> PWLFilippovSystem:
    if not isinstance(data, Mapping):
        raise ModelError("model must be a JSON object")
    for key in ("left", "right"):
        if key not in data:
            raise ModelError(f"model is missing '{key}'")
    mu = to_fraction(data.get("mu", 0))
    return PWLFilippovSystem(
        left=_half_from_mapping(data["left"], "left"),
        right=_half_from_mapping(data["right"], "right"),
        mu=float(mu), name=str(data.get("name", "system")), mu_exact=mu,
    )


def parse_model(text: str) -> PWLFilippovSystem:
    """Parse model-file JSON text.

    Coefficients may be JSON numbers or rational strings such as ``"-377/750"``.
    """

    def reject_constant(name):
        raise ModelError(f"non-finite value {name}")

    try:
        data = json.loads(text, parse_float=Fraction, parse_int=Fraction,
                          parse_constant=reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed model file: {exc}") from None
    return model_from_dict(data)


def model_to_dict(sys: PWLFilippovSystem) -> dict:
    def half(c: HalfSystemCoefficients) -> dict:
        return {k: _format_value(v, e) for k, v, e in zip(COEFF_NAMES, c.values(), c.exact)}

    return {"name": sys.name, "left": half(sys.left), "right": half(sys.right),
            "mu": _format_value(sys.mu, sys.mu_exact)}


def serialize_model(sys: PWLFilippovSystem) -> str:
    return json.dumps(model_to_dict(sys), indent=2)


def load_model(path) -> PWLFilippovSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# ---------------------------------------------------------------------------
# built-in examples

def example_unique_cycle(lambda_l="1/20", mu=1) -> PWLFilippovSystem:
    """Minimal unique-cycle example ("ex1"): an unstable focus x<0, stable focus x>0."""
    lam = to_fraction(lambda_l)
    return PWLFilippovSystem(
        left=HalfSystemCoefficients.from_values(0, 1, 0, -1, 2 * lam, -1),
        right=HalfSystemCoefficients.from_values(-1, 1, 1, -1, 0, -1),
        mu=float(to_fraction(mu)), name="ex1", mu_exact=to_fraction(mu),
    )


def example_three_cycles(mu=1) -> PWLFilippovSystem:
    """Example with three nested limit cycles ("ex2")."""
    return PWLFilippovSystem(
        left=HalfSystemCoefficients.from_values("-4/3", "20/3", "-4/3", "-377/750", "26/15", "-377/750"),
        right=HalfSystemCoefficients.from_values("-19/50", 1, "-19/50", -1, "-19/50", -1),
        mu=float(to_fraction(mu)), name="ex2", mu_exact=to_fraction(mu),
    )


def example_pseudo_equilibria(mu=1) -> PWLFilippovSystem:
    """Example with two admissible pseudo-equilibria for all mu != 0 ("ex3")."""
    return PWLFilippovSystem(
        left=HalfSystemCoefficients.from_values("3/5", 1, "-7/5", -1, "-1/2", "3/5"),
        right=HalfSystemCoefficients.from_values(-1, 1, 1, -1, "-3/10", "-2/5"),
        mu=float(to_fraction(mu)), name="ex3", mu_exact=to_fraction(mu),
    )


BUILTINS = ("ex1", "ex2", "ex3")


def builtin(name: str, mu=1, lambda_l=None) -> PWLFilippovSystem:
    if name == "ex1":
        return example_unique_cycle("1/20" if lambda_l is None else lambda_l, mu)
    if lambda_l is not None:
        raise ValueError("lambda_L applies to ex1 only")
    if name == "ex2":
        return example_three_cycles(mu)
    if name == "ex3":
        return example_pseudo_equilibria(mu)
    raise ValueError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
