"""Closed-form flow and the analytic half-return maps P_R, P_L and P = P_L o P_R.

For a half-system J with eigenvalues lam +- i*om, an orbit starting at
(0, q) has

    x(t) = (a2/om) * [exp(lam t) sin(om t) (q - zeta) - xi*mu*rho(om t; lam/om)]

so the return time solves a scalar equation in s = om*t.  When the focus
of J is virtual the root lies in (0, pi) and the equation is monotone;
when it is admissible it lies in (pi, 2 pi) and is bracketed by a pre-scan.
All maps take and return ordinates in the system's own coordinates, for any
sign of mu and of a2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import fold
from .model import AnalysisError, PWLFilippovSystem, focus_parameters
from .roots import bracketed_newton

TOL_PHI = 1e-12
GRAZING_REL = 1e-12
N_PRESCAN = 64

OK, NOT_ENTERING, GRAZING, NO_RETURN = 0, 1, 2, 3


class MapUndefinedError(AnalysisError):
    """The requested return does not exist (orbit never comes back, or slides)."""


class NoReturnError(MapUndefinedError):
    pass


class SlidingEntryError(MapUndefinedError):
    """An intermediate crossing lands in a sliding region."""


class GrazingError(AnalysisError):
    """Start point within the degeneracy threshold of a fold."""


class DomainError(AnalysisError):
    """Start point does not lead into the requested half-plane."""


_RHO_SERIES_MAX = 0.25
_RHO_TERMS = 24


def rho(s, nu):
    """Auxiliary function 1 - exp(nu s) (cos s - nu sin s).

    For small |(nu + i) s| the direct formula cancels to second order, so
    the Taylor series (1 + nu^2) * sum_{n>=2} Im((nu + i)^(n-1)) s^n / n! is
    used instead.
    """
    s = np.asarray(s, dtype=float)
    out = 1.0 - np.exp(nu * s) * (np.cos(s) - nu * np.sin(s))
    c = complex(nu, 1.0)
    small = np.abs(s) * abs(c) < _RHO_SERIES_MAX
    if np.any(small):
        ss = s[small] if out.ndim else s
        acc = np.zeros_like(ss)
        power = ss.copy()
        cn = 1.0 + 0j
        for n in range(2, _RHO_TERMS):
            power = power * ss / n
            cn = cn * c
            acc = acc + cn.imag * power
        if out.ndim:
            out[small] = (1 + nu * nu) * acc
        else:
            out = (1 + nu * nu) * acc
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class SideData:
    side: str
    lam: float
    om: float
    nu: float
    a2: float
    zeta: float
    xi: float
    mu: float
    x_star: float
    sigma: int  # +1 right half-plane, -1 left

    @property
    def admissible(self) -> bool:
        return self.sigma * self.x_star > 0

    @property
    def virtual(self) -> bool:
        return self.sigma * self.x_star < 0


def side_data(sys: PWLFilippovSystem, side: str) -> SideData:
    c = sys.half(side)
    lam, om = focus_parameters(c, "left" if side == "L" else "right")
    if c.a2 == 0:
        raise AnalysisError(f"a2 = 0 on the {side} side: fold undefined")
    det = float(c.det)
    beta = float(c.beta)
    xi = beta * om / (c.a2 * det)
    x_star = -beta * sys.mu / det
    return SideData(side, lam, om, lam / om, c.a2, fold(sys, side), xi, sys.mu, x_star,
                    1 if side == "R" else -1)


def xi(sys: PWLFilippovSystem, side: str) -> float:
    return side_data(sys, side).xi


def flow(sys: PWLFilippovSystem, side: str, t, x, y):
    """Closed-form flow of half-system ``side`` from (x, y) after time t.

    Uses exp(tA) = exp(lam t) [[cos + k sin, (a2/om) sin], [(b1/om) sin, cos - k sin]]
    with k = (a1 - b2)/(2 om), about the half-system's equilibrium.
    """
    c = sys.half(side)
    lam, om = focus_parameters(c, "left" if side == "L" else "right")
    det = float(c.det)
    xs = -(c.b2 * c.a3 - c.a2 * c.b3) * sys.mu / det
    ys = -(-c.b1 * c.a3 + c.a1 * c.b3) * sys.mu / det
    t = np.asarray(t, dtype=float)
    e = np.exp(lam * t)
    cs, sn = np.cos(om * t), np.sin(om * t)
    k = (c.a1 - c.b2) / (2 * om)
    dx, dy = x - xs, y - ys
    xt = e * ((cs + k * sn) * dx + (c.a2 / om) * sn * dy) + xs
    yt = e * ((c.b1 / om) * sn * dx + (cs - k * sn) * dy) + ys
    if xt.ndim == 0:
        return float(xt), float(yt)
    return xt, yt


def _crossing_function(sd: SideData, u):
    """F(s) proportional to x(s/om) from (0, zeta + u), and dF/ds."""
    nu, xm = sd.nu, sd.xi * sd.mu

    def f(s):
        return np.exp(nu * s) * np.sin(s) * u - xm * rho(s, nu)

    def df(s):
        e = np.exp(nu * s)
        return e * ((nu * np.sin(s) + np.cos(s)) * u - xm * (1 + nu * nu) * np.sin(s))

    return f, df


@dataclass
class _Solve:
    s: np.ndarray
    status: np.ndarray
    multi: np.ndarray  # more than one bracket found in the pre-scan


def _solve_return(sd: SideData, q, tol: float = TOL_PHI) -> _Solve:
    q = np.atleast_1d(np.asarray(q, dtype=float))
    u = q - sd.zeta
    n = q.size
    s = np.full(n, np.nan)
    status = np.zeros(n, dtype=int)
    multi = np.zeros(n, dtype=bool)

    entering = sd.sigma * sd.a2 * u > 0
    grazing = np.abs(u) < GRAZING_REL * max(1.0, abs(sd.zeta))
    status[~entering] = NOT_ENTERING
    status[entering & grazing] = GRAZING
    live = status == OK
    if not live.any():
        return _Solve(s, status, multi)

    if sd.mu == 0:
        s[live] = math.pi
        return _Solve(s, status, multi)

    inside = sd.sigma * np.sign(sd.a2)
    idx = np.flatnonzero(live)
    uu = u[idx]
    # |phi| <= tol, tightened near a fold where both terms of F shrink like u^2
    ftol = tol * sd.om / abs(sd.a2) * np.minimum(1.0, uu * uu)
    f, df = _crossing_function(sd, uu)

    if sd.virtual:
        lo = np.zeros(idx.size)
        hi = np.full(idx.size, math.pi)
        s[idx] = bracketed_newton(f, df, lo, hi, inside, ftol=ftol)
        return _Solve(s, status, multi)

    # admissible (or degenerate x* = 0 with mu != 0, which cannot happen for det != 0)
    grid = math.pi + np.linspace(0.0, math.pi, N_PRESCAN)
    fu, _ = _crossing_function(sd, uu[:, None])
    vals = fu(grid[None, :]) * inside  # > 0 while inside the half-plane
    vals[:, 0] = 1.0  # s = pi is inside for an admissible focus
    out = vals <= 0
    found = out.any(axis=1)
    first = np.argmax(out, axis=1)
    changes = np.sum(np.diff(np.sign(vals), axis=1) != 0, axis=1)
    multi_local = changes > 1
    bad = idx[~found]
    status[bad] = NO_RETURN
    ok = found
    if ok.any():
        k = first[ok]
        lo = grid[k - 1]
        hi = grid[k]
        f2, df2 = _crossing_function(sd, uu[ok])
        s[idx[ok]] = bracketed_newton(f2, df2, lo, hi, inside, ftol=ftol[ok])
        multi[idx[ok]] = multi_local[ok]
    return _Solve(s, status, multi)


@dataclass
class HalfMapResult:
    p: float | np.ndarray
    t: float | np.ndarray
    dp_dq: float | np.ndarray
    xi: float
    dp_dq_ratio: float | np.ndarray = None  # the rho-ratio form of the derivative
    notes: tuple = field(default=())


def _image(sd: SideData, q, s):
    """Return ordinate and both derivative forms from the return angle s."""
    u = q - sd.zeta
    if sd.mu == 0:
        pz = -np.exp(sd.nu * math.pi) * u
    else:
        pz = -sd.xi * sd.mu * np.exp(sd.nu * s) * rho(s, -sd.nu) / np.sin(s)
    dp_exp = u / pz * np.exp(2 * sd.nu * s)
    dp_ratio = -rho(s, sd.nu) / rho(s, -sd.nu)
    return sd.zeta + pz, dp_exp, dp_ratio


def _raise_for(sd: SideData, q, status):
    where = "x>0" if sd.side == "R" else "x<0"
    bad = np.flatnonzero(status != OK)
    if bad.size == 0:
        return
    i = bad[0]
    qi = float(np.atleast_1d(q)[i])
    code = status[i]
    if code == NOT_ENTERING:
        raise DomainError(f"orbit from (0, {qi!r}) does not enter {where} (fold at {sd.zeta!r})")
    if code == GRAZING:
        raise GrazingError(f"start (0, {qi!r}) grazes the fold at {sd.zeta!r}")
    raise NoReturnError(f"orbit from (0, {qi!r}) in {where} does not return to x=0")


def half_map(sys: PWLFilippovSystem, side: str, q, tol: float = TOL_PHI) -> HalfMapResult:
    sd = side_data(sys, side)
    scalar = np.ndim(q) == 0
    qa = np.atleast_1d(np.asarray(q, dtype=float))
    sol = _solve_return(sd, qa, tol)
    _raise_for(sd, qa, sol.status)
    p, dp, dpr = _image(sd, qa, sol.s)
    t = sol.s / sd.om
    notes = ()
    if sol.multi.any():
        notes = ("multiple sign changes in the return window; smallest time taken",)
    if scalar:
        return HalfMapResult(float(p[0]), float(t[0]), float(dp[0]), sd.xi, float(dpr[0]), notes)
    return HalfMapResult(p, t, dp, sd.xi, dpr, notes)


def half_map_right(sys, q, tol: float = TOL_PHI) -> HalfMapResult:
    return half_map(sys, "R", q, tol)


def half_map_left(sys, q, tol: float = TOL_PHI) -> HalfMapResult:
    return half_map(sys, "L", q, tol)


def return_time_right(sys, q, tol: float = TOL_PHI):
    return half_map(sys, "R", q, tol).t


def return_time_left(sys, q, tol: float = TOL_PHI):
    return half_map(sys, "L", q, tol).t


def implicit_residual(sys: PWLFilippovSystem, side: str, q, t) -> float:
    """q - zeta - xi*mu*exp(-lam t) rho(om t; nu)/sin(om t): zero at the return time."""
    sd = side_data(sys, side)
    s = sd.om * t
    return (q - sd.zeta) - sd.xi * sd.mu * math.exp(-sd.lam * t) * rho(s, sd.nu) / math.sin(s)


@dataclass
class ComposedMapResult:
    p: float | np.ndarray
    dp_dq: float | np.ndarray
    h: float | np.ndarray
    p_right: float | np.ndarray
    t_right: float | np.ndarray
    t_left: float | np.ndarray


def _composed_arrays(sys: PWLFilippovSystem, q, tol: float = TOL_PHI):
    """Vectorised P = P_L o P_R with per-point status.

    Status codes: 0 valid, 1 right map undefined, 2 P_R lands in sliding,
    3 left map undefined, 4 P lands where the orbit cannot cross into x>0.
    """
    R, L = side_data(sys, "R"), side_data(sys, "L")
    q = np.atleast_1d(np.asarray(q, dtype=float))
    n = q.size
    out = {k: np.full(n, np.nan) for k in ("p", "dp_dq", "h", "p_right", "t_right", "t_left")}
    status = np.zeros(n, dtype=int)

    sr = _solve_return(R, q, tol)
    okr = sr.status == OK
    status[~okr] = 1
    pr = np.full(n, np.nan)
    if okr.any():
        pr[okr], _, _ = _image(R, q[okr], sr.s[okr])
    out["p_right"] = pr
    out["t_right"] = sr.s / R.om

    crosses = okr & (L.sigma * L.a2 * (pr - L.zeta) > 0)
    status[okr & ~crosses] = 2
    sl_s = np.full(n, np.nan)
    okl = np.zeros(n, dtype=bool)
    if crosses.any():
        sl = _solve_return(L, pr[crosses], tol)
        sl_s[crosses] = sl.s
        okl[crosses] = sl.status == OK
    status[crosses & ~okl] = 3
    p = np.full(n, np.nan)
    if okl.any():
        p[okl], _, _ = _image(L, pr[okl], sl_s[okl])
    into_right = okl & (R.sigma * R.a2 * (p - R.zeta) > 0)
    status[okl & ~into_right] = 4

    tl = np.where(okl, sl_s / L.om, np.nan)
    h = R.lam * out["t_right"] + L.lam * tl
    dp = ((q - R.zeta) * (pr - L.zeta)) / ((pr - R.zeta) * (p - L.zeta)) * np.exp(2 * h)
    out.update(p=p, dp_dq=np.where(okl, dp, np.nan), h=np.where(okl, h, np.nan), t_left=tl)
    return out, status


def composed_map(sys: PWLFilippovSystem, q, tol: float = TOL_PHI) -> ComposedMapResult:
    """Poincare map P(q) = P_L(P_R(q)) with dP/dq = ... exp(2h), h = lam_R T_R + lam_L T_L.

    Raises SlidingEntryError when P_R(q) falls where the orbit would slide, so
    the caller can fall back to the simulated map.
    """
    scalar = np.ndim(q) == 0
    qa = np.atleast_1d(np.asarray(q, dtype=float))
    R = side_data(sys, "R")
    sr = _solve_return(R, qa, tol)
    _raise_for(R, qa, sr.status)
    out, status = _composed_arrays(sys, qa, tol)
    bad = np.flatnonzero((status == 2) | (status == 3))
    if bad.size:
        i = bad[0]
        if status[i] == 2:
            raise SlidingEntryError(
                f"P_R({qa[i]!r}) = {out['p_right'][i]!r} lies where the orbit cannot cross into x<0")
        L = side_data(sys, "L")
        _raise_for(L, out["p_right"][i:i + 1], np.array([NO_RETURN]))
    res = ComposedMapResult(out["p"], out["dp_dq"], out["h"], out["p_right"],
                            out["t_right"], out["t_left"])
    if scalar:
        return ComposedMapResult(*(float(np.asarray(v)[0]) for v in
                                   (res.p, res.dp_dq, res.h, res.p_right, res.t_right, res.t_left)))
    return res


def tabulate(sys: PWLFilippovSystem, q) -> list[dict]:
    """Rows (q, P_R, T_R, P, dP_dq, h); undefined entries are NaN."""
    out, _ = _composed_arrays(sys, q)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    return [
        {"q": float(q[i]), "P_R": float(out["p_right"][i]), "T_R": float(out["t_right"][i]),
         "P": float(out["p"][i]), "dP_dq": float(out["dp_dq"][i]), "h": float(out["h"][i])}
        for i in range(q.size)
    ]
