"""Fixed points of the Poincare map, cycle certificates and BEB summaries.

The scan works in a normalised frame: y is reflected when a2L < 0, the state
is scaled so that |mu| = 1, and for mu = -1 with an attracting sliding
segment time is reversed so that the analytic map is defined everywhere.
Ordinates in that frame are dimensionless (y / mu up to sign); everything
returned to the caller is mapped back to the original coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import equilibria, sliding_region
from .halfmaps import (
    MapUndefinedError,
    SlidingEntryError,
    _composed_arrays,
    composed_map,
    half_map,
    rho,
    side_data,
)
from .model import AnalysisError, PWLFilippovSystem, eigen_structure, normalize_mu, reflect_y, reverse_time
from .roots import bisect_scalar
from .sim import numeric_poincare

FP_TOL = 1e-11
RESIDUAL_TOL = 1e-9
N_SCAN = 4096


class CycleViaSlidingError(AnalysisError):
    """The fixed point is reached only through a sliding segment, so no certificate exists."""

    def __init__(self, message, y=None, dP_dq=None, stability=None):
        super().__init__(message)
        self.y = y
        self.dP_dq = dP_dq
        self.stability = stability


@dataclass(frozen=True)
class FixedPoint:
    y: float  # original ordinate where the cycle enters x > 0
    q: float  # dimensionless ordinate y / mu
    dP_dq: float
    stability: str
    via_sliding: bool
    method: str  # analytic | analytic_reversed | simulated


@dataclass(frozen=True)
class LimitCycleCertificate:
    q_R: float  # dimensionless ordinates, the cycle meets x = 0 at y = q*mu
    q_L: float
    y_R: float
    y_L: float
    t_R: float
    t_L: float
    stability: str
    residuals: tuple
    dP_dq_at_fp: float
    mu: float

    @property
    def period(self) -> float:
        return self.t_R + self.t_L

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


@dataclass(frozen=True)
class _Frame:
    work: PWLFilippovSystem
    flip: bool
    reversed: bool
    scale: float

    def to_original(self, w):
        return self.scale * (-w if self.flip else w)

    def to_work(self, y):
        return (-y if self.flip else y) / self.scale


def _frame(sys: PWLFilippovSystem) -> _Frame:
    if sys.mu == 0:
        raise AnalysisError("mu = 0: the map is homogeneous (P(q) = q exp(alpha pi)); no isolated cycles")
    a2l, a2r = sys.left.exact[1], sys.right.exact[1]
    if a2l == 0 or a2r == 0:
        raise AnalysisError("a2 = 0 on one side: folds undefined")
    if a2l * a2r < 0:
        raise AnalysisError("opposite rotation senses: the return map is not defined on one half-line")
    eigen_structure(sys)  # raises on real eigenvalues
    flip = a2l < 0
    w = reflect_y(sys) if flip else sys
    w, scale = normalize_mu(w)
    rev = False
    if w.mu < 0 and sliding_region(w).kind == "attracting":
        w, rev = reverse_time(w), True
    return _Frame(w, flip, rev, scale)


def _stability(d: float) -> str:
    if not math.isfinite(d):
        return "unknown"
    if abs(d) < 1:
        return "stable"
    return "unstable" if abs(d) > 1 else "degenerate"


def _map_arrays(work: PWLFilippovSystem, q: np.ndarray, use_sim: bool = True):
    """Generalised map on a grid: P, dP/dq, via_sliding and a defined mask."""
    out, status = _composed_arrays(work, q)
    p = out["p"].copy()
    dp = out["dp_dq"].copy()
    via = np.zeros(q.size, dtype=bool)
    p[status != 0] = np.nan
    dp[status != 0] = np.nan
    if use_sim:
        for i in np.flatnonzero((status == 2) | (status == 4)):
            try:
                p[i], via[i] = numeric_poincare(work, float(q[i]))
            except MapUndefinedError:
                pass
    return p, dp, via, np.isfinite(p)


def _map_scalar(work: PWLFilippovSystem, q: float):
    p, dp, via, ok = _map_arrays(work, np.array([q]))
    if not ok[0]:
        raise MapUndefinedError(f"generalised map undefined at q = {q!r}")
    return float(p[0]), float(dp[0]), bool(via[0])


@dataclass
class ScanResult:
    q: np.ndarray
    p: np.ndarray
    via_sliding: np.ndarray
    notes: list = field(default_factory=list)


def default_q_max(sys: PWLFilippovSystem) -> float:
    work = _frame(sys).work
    zl, zr = side_data(work, "L").zeta, side_data(work, "R").zeta
    return 1e3 * max(1.0, abs(zl), abs(zr))


def scan_grid(work: PWLFilippovSystem, q_max: float | None = None, n_scan: int = N_SCAN) -> np.ndarray:
    zl, zr = side_data(work, "L").zeta, side_data(work, "R").zeta
    if q_max is None:
        q_max = 1e3 * max(1.0, abs(zl), abs(zr))
    eps = 1e-8 * max(1.0, abs(zr))
    if n_scan < 2:
        raise ValueError("n_scan must be at least 2")
    if not q_max > zr + eps:
        raise ValueError(f"scan range invalid: q_max = {q_max!r} must exceed zeta_R + eps = {zr + eps!r}")
    return zr + np.geomspace(eps, q_max - zr, n_scan)


def scan(sys: PWLFilippovSystem, q_max: float | None = None, n_scan: int = N_SCAN) -> tuple[_Frame, ScanResult]:
    """Sample the displacement P(q) - q in the normalised frame."""
    fr = _frame(sys)
    q = scan_grid(fr.work, q_max, n_scan)
    p, _, via, ok = _map_arrays(fr.work, q)
    res = ScanResult(q, p, via)
    if not ok.any():
        raise MapUndefinedError("map undefined throughout the scan range")
    left = side_data(fr.work, "L")
    if left.admissible and ok[0] and not p[0] > q[0]:
        res.notes.append("displacement near the fold is not positive although the left focus is admissible")
    alpha = eigen_structure(fr.work).alpha
    if ok[-1] and alpha != 0 and np.sign(p[-1] - q[-1]) != np.sign(math.exp(alpha * math.pi) - 1):
        res.notes.append("displacement at q_max does not have the sign of exp(alpha pi) - 1")
    if not ok.all():
        res.notes.append(f"map undefined at {int((~ok).sum())} of {q.size} scan points")
    return fr, res


def _refine(work: PWLFilippovSystem, lo: float, hi: float):
    def disp(q):
        return _map_scalar(work, q)[0] - q

    try:
        q = bisect_scalar(disp, lo, hi, ftol=FP_TOL)
        p, dp, via = _map_scalar(work, q)
    except MapUndefinedError:
        return None
    if abs(p - q) > FP_TOL * max(1.0, abs(q)):
        return None  # a jump of the generalised map, not a fixed point
    return q, p, dp, via


def _fd_derivative(work: PWLFilippovSystem, q: float) -> float:
    step = 1e-6 * max(abs(q), 1e-300)
    return (_map_scalar(work, q + step)[0] - _map_scalar(work, q - step)[0]) / (2 * step)


def find_fixed_points(sys: PWLFilippovSystem, q_max: float | None = None, n_scan: int = N_SCAN,
                      notes: list | None = None) -> list[FixedPoint]:
    """All sign changes of P(q) - q on the default (or given) scan, sorted by y.

    ``q_max`` is dimensionless (ordinates divided by |mu|).  Orbits that pass
    through an attracting sliding segment use the simulated map and a
    finite-difference derivative.
    """
    fr, res = scan(sys, q_max, n_scan)
    if notes is not None:
        notes.extend(res.notes)
    work = fr.work
    d = res.p - res.q
    ok = np.isfinite(d)
    pairs = np.flatnonzero(ok[:-1] & ok[1:] & (np.sign(d[:-1]) != np.sign(d[1:])))
    found = []
    for i in pairs:
        if d[i] == 0:
            refined = (res.q[i],) + _map_scalar(work, res.q[i])
        else:
            refined = _refine(work, res.q[i], res.q[i + 1])
        if refined is None:
            if notes is not None:
                notes.append(f"sign change near q = {res.q[i]!r} is a discontinuity of the map")
            continue
        q, _, dp, via = refined
        if via or not math.isfinite(dp):
            dp = _fd_derivative(work, q)
            method = "simulated"
        else:
            method = "analytic_reversed" if fr.reversed else "analytic"
        if fr.reversed:
            dp = 1.0 / dp if dp != 0 else math.inf
        y = fr.to_original(q)
        found.append(FixedPoint(y, y / sys.mu, dp, _stability(dp), via, method))
    return sorted(found, key=lambda f: f.y)


def _residuals(sys: PWLFilippovSystem, q_r, q_l, t_r, t_l) -> tuple:
    """Residuals of the four implicit cycle equations in dimensionless ordinates."""
    out = []
    for side, q_in, q_out, t in (("R", q_r, q_l, t_r), ("L", q_l, q_r, t_l)):
        sd = side_data(sys, side)
        c = sys.half(side)
        shift = c.a3 / c.a2
        s = sd.om * t
        out.append(q_in + shift - sd.xi * math.exp(-sd.lam * t) * rho(s, sd.nu) / math.sin(s))
        out.append(q_out + shift + sd.xi * math.exp(sd.lam * t) * rho(s, -sd.nu) / math.sin(s))
    r1, r2, r3, r4 = out
    return r1, r2, r3, r4


def certify_cycle(sys: PWLFilippovSystem, y_star: float, tol: float = RESIDUAL_TOL) -> LimitCycleCertificate:
    """Certificate for the crossing cycle entering x > 0 at the original ordinate ``y_star``."""
    if sys.mu == 0:
        raise AnalysisError("mu = 0: no limit cycle to certify")
    try:
        cm = composed_map(sys, y_star)
    except SlidingEntryError as exc:
        raise _sliding_error(sys, y_star, str(exc)) from exc
    if not (math.isfinite(cm.p)):
        raise _sliding_error(sys, y_star, "the return lands on a sliding segment")
    scale = max(1.0, abs(y_star))
    if abs(cm.p - y_star) > 1e3 * FP_TOL * scale:
        raise AnalysisError(f"y = {y_star!r} is not a fixed point: P(y) - y = {cm.p - y_star!r}")
    right = half_map(sys, "R", y_star)
    left = half_map(sys, "L", right.p)
    mu = sys.mu
    q_r, q_l = y_star / mu, right.p / mu
    res = _residuals(sys, q_r, q_l, right.t, left.t)
    worst = max(abs(r) for r in res)
    if worst > tol:
        raise AnalysisError(f"implicit cycle equations not satisfied: max residual {worst!r}")
    return LimitCycleCertificate(q_r, q_l, y_star, right.p, right.t, left.t, _stability(cm.dp_dq),
                                 res, cm.dp_dq, mu)


def _sliding_error(sys, y_star, why):
    try:
        fr = _frame(sys)
        q = fr.to_work(y_star)
        dp = _fd_derivative(fr.work, q)
        if fr.reversed:
            dp = 1.0 / dp if dp != 0 else math.inf
    except AnalysisError:
        dp = math.nan
    return CycleViaSlidingError(
        f"cycle through y = {y_star!r} is reached only via sliding ({why}); "
        f"simulated dP/dq = {dp!r}", y_star, dp, _stability(dp))


def cycles(sys: PWLFilippovSystem, q_max: float | None = None, n_scan: int = N_SCAN) -> list[dict]:
    """Fixed points with certificates where they exist, otherwise simulation records."""
    records = []
    for fp in find_fixed_points(sys, q_max, n_scan):
        rec = {"y": fp.y, "q": fp.q, "dP_dq": fp.dP_dq, "stability": fp.stability,
               "via_sliding": fp.via_sliding, "method": fp.method}
        if fp.via_sliding:
            rec["certificate"] = None
            rec["note"] = "sliding-mediated cycle: stability from finite differences of the simulated map"
        else:
            try:
                rec["certificate"] = certificate_dict(certify_cycle(sys, fp.y))
            except AnalysisError as exc:
                rec["certificate"] = None
                rec["note"] = str(exc)
        records.append(rec)
    return records


def certificate_dict(cert: LimitCycleCertificate) -> dict:
    return {"q_R": cert.q_R, "q_L": cert.q_L, "y_R": cert.y_R, "y_L": cert.y_L,
            "t_R": cert.t_R, "t_L": cert.t_L, "stability": cert.stability,
            "residuals": list(cert.residuals), "dP_dq_at_fp": cert.dP_dq_at_fp, "mu": cert.mu}


def displacement_table(sys: PWLFilippovSystem, q_max: float | None = None, n_scan: int = 512) -> list[dict]:
    """Rows (q, P(q) - q, via_sliding) in dimensionless ordinates."""
    _, res = scan(sys, q_max, n_scan)
    return [{"q": float(q), "displacement": float(p - q), "via_sliding": bool(v)}
            for q, p, v in zip(res.q, res.p, res.via_sliding)]


def _focus_summary(sys: PWLFilippovSystem) -> dict:
    eig = eigen_structure(sys)
    eq_l, eq_r = equilibria(sys)
    out = []
    for eq, lam in ((eq_l, eig.lambda_L), (eq_r, eig.lambda_R)):
        if eq.admissible:
            kind = "stable focus" if lam < 0 else "unstable focus" if lam > 0 else "centre"
            out.append({"side": eq.side, "x": eq.x_star, "y": eq.y_star, "kind": kind})
    return {"admissible_foci": out, "boundary_equilibrium": eq_l.boundary}


def beb_summary(sys: PWLFilippovSystem) -> dict:
    """Admissible focus, sliding kind, pseudo-equilibria and cycles for mu = -1, 0, 1."""
    from .sliding import pseudo_equilibria

    panels = {}
    for mu in (-1, 0, 1):
        s = sys.with_mu(mu)
        panel = {"mu": mu}
        try:
            panel.update(_focus_summary(s))
        except AnalysisError as exc:
            panel["error"] = str(exc)
            panels[str(mu)] = panel
            continue
        try:
            panel["sliding"] = sliding_region(s).kind
        except AnalysisError as exc:
            panel["sliding"] = f"undefined: {exc}"
        try:
            rep = pseudo_equilibria(s)
            panel["pseudo_equilibria"] = [
                {"y": r.y, "stability": r.stability} for r in rep.admissible_roots]
        except AnalysisError:
            panel["pseudo_equilibria"] = []
        if mu == 0:
            panel["cycles"] = []
            panel["note"] = "bifurcation point: the map is linear, no isolated cycles"
        else:
            try:
                fps = find_fixed_points(s)
                panel["cycles"] = [{"y": f.y, "stability": f.stability, "via_sliding": f.via_sliding}
                                   for f in fps]
            except AnalysisError as exc:
                panel["cycles"] = []
                panel["note"] = str(exc)
        panel["cycle_count"] = len(panel["cycles"])
        panels[str(mu)] = panel
    return {"name": sys.name, "panels": panels}
