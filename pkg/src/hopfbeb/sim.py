"""Event-driven integrator for the full Filippov system.

Within a half-plane the flow is propagated exactly from the eigen-decomposition
of the Jacobian, so x(t) = x* + exp(lam t) (A cos(om t) + B sin(om t)).  Its
critical times are known in closed form, which splits time into monotone
pieces; a crossing of x = 0 is then bracketed without any risk of stepping
over it and located with Brent's method.  On an attracting sliding segment
the scalar sliding ODE is integrated with RK45 (samples) and the exit time
is obtained by quadrature.  Repelling segments are treated as crossing sets.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq

from .classify import sliding_region
from .halfmaps import DomainError, MapUndefinedError
from .model import AnalysisError, PWLFilippovSystem
from .sliding import SlidingField, quadratic_roots, numerator_coefficients

LEFT, RIGHT, SLIDING = "left", "right", "sliding"
FOLD_TOL = 1e-12


class DegeneracyError(AnalysisError):
    """Simultaneous tangency or a crossing that cannot be resolved."""


@dataclass
class SimControls:
    event_tol: float = 1e-12
    max_events: int = 400
    record: bool = True
    samples_per_turn: int = 96
    pseudo_eq_tol: float = 1e-12
    sliding_rtol: float = 1e-10


@dataclass(frozen=True)
class Event:
    t: float
    kind: str  # cross_LR, cross_RL, slide_enter, slide_exit_fold, converge_pseudo_eq
    y: float
    into: str  # mode after the event


@dataclass
class Trajectory:
    samples: list = field(default_factory=list)  # (t, x, y, mode)
    events: list = field(default_factory=list)
    status: str = "t_max"  # t_max | equilibrium | pseudo_equilibrium | stopped | max_events
    final: tuple = ()

    def as_arrays(self):
        if not self.samples:
            return np.empty(0), np.empty(0), np.empty(0), []
        t, x, y, m = zip(*self.samples)
        return np.array(t), np.array(x), np.array(y), list(m)


class _Half:
    """Exact propagation for one half-system.

    From a start z0 the flow is z0 + Re(M (exp(c t) - 1)/c) per component,
    with c = lam + i om and M fixed by the first two derivatives at z0.
    Working with increments keeps orbits that barely leave x = 0 (starts next
    to a fold) resolved to relative precision.
    """

    def __init__(self, sys: PWLFilippovSystem, side: str):
        c = sys.half(side)
        self.sys, self.side = sys, side
        self.mode = LEFT if side == "L" else RIGHT
        self.sigma = -1 if side == "L" else 1
        A = np.array([[c.a1, c.a2], [c.b1, c.b2]])
        w = np.linalg.eigvals(A)
        k = int(np.argmax(w.imag))
        if w[k].imag <= 0:
            raise AnalysisError(f"{self.mode} half-system has real eigenvalues")
        self.lam, self.om = float(w[k].real), float(w[k].imag)
        self.c = complex(self.lam, self.om)
        self.A = A
        self.z_star = np.linalg.solve(A, -np.array([c.a3, c.b3]) * sys.mu)

    def setup(self, x0, y0):
        """(x0, y0, Mx, My): x'(t) = Re(Mx exp(c t)) and likewise for y."""
        f, g = self.sys.vector_field(self.side, x0, y0)
        (a1, a2), (b1, b2) = self.A
        fdd, gdd = a1 * f + a2 * g, b1 * f + b2 * g
        mx = complex(f, -(fdd - self.lam * f) / self.om)
        my = complex(g, -(gdd - self.lam * g) / self.om)
        return (float(x0), float(y0), mx, my)

    def _phi(self, t):
        """(exp(c t) - 1)/c without cancellation at small t."""
        wt = self.om * t
        em1 = np.expm1(self.lam * t) * np.exp(1j * wt) + (-2.0 * np.sin(0.5 * wt) ** 2 + 1j * np.sin(wt))
        return em1 / self.c

    def state(self, K, t):
        x0, y0, mx, my = K
        ph = self._phi(np.asarray(t, dtype=float))
        return x0 + np.real(mx * ph), y0 + np.real(my * ph)

    def x_of(self, K):
        x0, _, mx, _ = K
        lam, om, cc = self.lam, self.om, self.c

        def x(t):
            wt = om * t
            em1 = math.expm1(lam * t) * complex(math.cos(wt), math.sin(wt)) \
                + complex(-2.0 * math.sin(0.5 * wt) ** 2, math.sin(wt))
            return x0 + (mx * em1 / cc).real

        # x'(t) = exp(lam t) (C cos(om t) + D sin(om t))
        delta = math.atan2(-mx.imag, mx.real)
        return x, delta

    def next_crossing(self, K, t_max):
        """First t in (0, t_max] where x leaves this half-plane.

        Returns (t, status) with status "cross", "equilibrium" or "t_max".
        """
        if not t_max > 0:
            return 0.0, "t_max"
        x, delta = self.x_of(K)
        om, sig = self.om, self.sigma
        xs = self.z_star[0]
        t_min = 1e-13 / om
        k = math.ceil((om * t_min - delta - math.pi / 2) / math.pi)
        t_prev, x_prev = 0.0, x(0.0)
        if sig * x_prev < -1e-9 * max(1.0, abs(xs)):
            raise DegeneracyError("start point lies on the wrong side of x = 0")
        converging = self.lam <= 0 and sig * xs > 0
        tiny = 1e-12 * abs(K[2]) / om
        while True:
            tk = (delta + math.pi / 2 + k * math.pi) / om
            k += 1
            if tk <= t_min:
                continue
            last = tk >= t_max
            tb = t_max if last else tk
            xb = x(tb)
            if sig * xb <= 0 and t_prev == 0.0 and abs(xb) <= tiny:
                # critical point of a fold start, displaced off t = 0 by rounding
                t_prev, x_prev = tb, 0.0
                continue
            if sig * xb <= 0:
                if xb == 0.0:
                    return tb, "cross"
                a = t_prev
                if sig * x_prev <= 0:
                    # leaving from x = 0 at a fold: nudge off the critical point
                    a = t_prev + 0.5 * (tb - t_prev) * 1e-6
                    if sig * x(a) <= 0:
                        raise DegeneracyError("orbit leaves the half-plane immediately")
                return brentq(x, a, tb, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200), "cross"
            if last:
                return t_max, "t_max"
            if converging and sig * (xb - xs) < 0:
                # extremum on the switching-line side stayed inside: never returns
                return math.inf, "equilibrium"
            t_prev, x_prev = tb, xb


def _decide_at_line(sys, y, came_from):
    """Mode entered at (0, y) after arriving from ``came_from``."""
    fl = sys.f("L", 0.0, y)
    fr = sys.f("R", 0.0, y)
    # arrival at a fold leaves f of the arriving side at rounding level
    tol = FOLD_TOL * max(1.0, abs(y), abs(sys.mu))
    if came_from == RIGHT:
        if fl <= 0:
            return LEFT, "cross_RL"
        if fr < tol:
            return SLIDING, "slide_enter"
        return RIGHT, None  # grazed the right fold
    if fr >= 0:
        return RIGHT, "cross_LR"
    if fl > -tol:
        return SLIDING, "slide_enter"
    return LEFT, None


def _initial_mode(sys, y):
    fl = sys.f("L", 0.0, y)
    fr = sys.f("R", 0.0, y)
    if fl == 0 and fr == 0:
        if sys.g("L", 0.0, y) == 0 and sys.g("R", 0.0, y) == 0:
            return None
        raise DegeneracyError("start point is a fold of both half-systems")
    if fl >= 0 and fr > 0:
        return RIGHT
    if fl < 0 and fr <= 0:
        return LEFT
    if fl > 0 and fr < 0:
        return SLIDING
    if fl >= 0 and fr <= 0:
        return SLIDING  # closed attracting segment (one of them is a fold)
    return RIGHT  # repelling segment: treated as a crossing set


class _Slider:
    def __init__(self, sys: PWLFilippovSystem):
        self.sys = sys
        region = sliding_region(sys)
        self.lo, self.hi = region.interval
        self.zeta_L, self.zeta_R = region.zeta_L, region.zeta_R
        self.field = SlidingField(sys)
        A, B, C = numerator_coefficients(sys)
        self.roots = quadratic_roots(float(A), float(B), float(C))

    def plan(self, y0, tol):
        """(target_y, kind, exit_mode): where sliding from y0 ends."""
        g0 = float(self.field(y0))
        if abs(g0) <= tol:
            return y0, "pseudo", None
        d = 1.0 if g0 > 0 else -1.0
        end = self.hi if d > 0 else self.lo
        blocking = [r for r in self.roots if d * (r - y0) > 0 and d * (end - r) >= 0]
        if blocking:
            return min(blocking, key=lambda r: abs(r - y0)), "pseudo", None
        if end == self.zeta_L and end == self.zeta_R:
            raise DegeneracyError("simultaneous tangency at the sliding endpoint")
        return end, "exit", LEFT if end == self.zeta_L else RIGHT


def integrate(sys: PWLFilippovSystem, x0: float, y0: float, t_max: float,
              controls: SimControls | None = None, side: str | None = None,
              stop_on=None) -> Trajectory:
    """Forward Filippov orbit from (x0, y0) up to time t_max.

    ``side`` forces the initial half-plane ("left"/"right") for a start on
    x = 0.  ``stop_on(event)`` may return True to end the run after an event.
    """
    ctl = controls or SimControls()
    if not (t_max > 0):
        raise ValueError("t_max must be positive")
    if not (math.isfinite(x0) and math.isfinite(y0)):
        raise ValueError("initial state must be finite")
    halves = {LEFT: _Half(sys, "L"), RIGHT: _Half(sys, "R")}
    slider = None
    traj = Trajectory()

    if x0 < 0:
        mode = LEFT
    elif x0 > 0:
        mode = RIGHT
    elif side is not None:
        mode = {"L": LEFT, "R": RIGHT}.get(side, side)
    else:
        mode = _initial_mode(sys, y0)
        if mode is None:
            traj.samples.append((0.0, 0.0, y0, LEFT))
            traj.status, traj.final = "equilibrium", (0.0, 0.0, y0, LEFT)
            return traj

    t, x, y = 0.0, float(x0), float(y0)
    n_events = 0
    while True:
        if t >= t_max:
            traj.status, traj.final = "t_max", (t, x, y, mode)
            return traj
        if mode in (LEFT, RIGHT):
            half = halves[mode]
            K = half.setup(x, y)
            tc, status = half.next_crossing(K, t_max - t)
            if ctl.record:
                end = min(tc, t_max - t)
                dt = 2 * math.pi / (half.om * ctl.samples_per_turn)
                ts = np.append(np.arange(0.0, end, dt), end)
                xs, ys = half.state(K, ts)
                traj.samples.extend((t + a, b, c, mode) for a, b, c in zip(ts, xs, ys))
            if status != "cross":
                if status == "equilibrium":
                    traj.status = "equilibrium"
                    tf = t_max
                else:
                    traj.status = "t_max"
                    tf = t_max
                xf, yf = half.state(K, tf - t)
                traj.final = (tf, float(xf), float(yf), mode)
                return traj
            _, yc = half.state(K, tc)
            t, x, y = t + tc, 0.0, float(yc)
            new_mode, kind = _decide_at_line(sys, y, mode)
            if kind is None:
                raise DegeneracyError(f"orbit grazes x=0 at y={y!r}")
            ev = Event(t, kind, y, new_mode)
        else:
            if slider is None:
                slider = _Slider(sys)
            target, kind, exit_mode = slider.plan(y, ctl.pseudo_eq_tol)
            g = slider.field
            if kind == "pseudo":
                tau, y_end, reached = _slide_to_rest(g, y, target, t_max - t, ctl, traj, t)
                if reached:
                    t += tau
                    ev = Event(t, "converge_pseudo_eq", y_end, SLIDING)
                    traj.events.append(ev)
                    traj.status = "pseudo_equilibrium"
                    traj.final = (t, 0.0, y_end, SLIDING)
                    return traj
                traj.status = "t_max"
                traj.final = (t_max, 0.0, y_end, SLIDING)
                return traj
            tau = quad(lambda s: 1.0 / g(s), y, target, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
            if tau < 0 or not math.isfinite(tau):
                raise DegeneracyError("sliding exit time is not finite")
            if t + tau > t_max:
                _, y_end, _ = _slide_to_rest(g, y, target, t_max - t, ctl, traj, t, stop_at_target=False)
                traj.status = "t_max"
                traj.final = (t_max, 0.0, y_end, SLIDING)
                return traj
            if ctl.record:
                _record_slide(g, y, tau, ctl, traj, t)
            t, x, y = t + tau, 0.0, target
            new_mode = exit_mode
            ev = Event(t, "slide_exit_fold", y, new_mode)
        traj.events.append(ev)
        n_events += 1
        mode = new_mode
        if stop_on is not None and stop_on(ev):
            traj.status = "stopped"
            traj.final = (t, x, y, mode)
            return traj
        if n_events >= ctl.max_events:
            traj.status = "max_events"
            traj.final = (t, x, y, mode)
            return traj


def _record_slide(g, y0, tau, ctl, traj, t0):
    n = max(2, ctl.samples_per_turn)
    ts = np.linspace(0.0, tau, n)
    sol = solve_ivp(lambda s, v: [g(v[0])], (0.0, tau), [y0], method="RK45",
                    t_eval=ts, rtol=ctl.sliding_rtol, atol=1e-12)
    traj.samples.extend((t0 + a, 0.0, float(b), SLIDING) for a, b in zip(sol.t, sol.y[0]))


def _slide_to_rest(g, y0, target, t_span, ctl, traj, t0, stop_at_target=True):
    """Slide from y0 toward ``target`` for at most t_span.

    With ``stop_at_target`` the run ends where |g_slide| first drops to the
    pseudo-equilibrium tolerance; that ordinate comes from a bracketed root
    solve and the time to reach it from quadrature of 1/g.
    """
    tol = ctl.pseudo_eq_tol
    if abs(float(g(y0))) <= tol:
        return 0.0, y0, True
    if stop_at_target:
        y_end = target
        if abs(float(g(target))) < tol:
            y_end = brentq(lambda v: abs(float(g(v))) - tol, y0, target, xtol=1e-15, rtol=1e-15)
        with warnings.catch_warnings():
            # 1/g grows like 1/|y - y*| near the end, so quad's error estimate
            # is pessimistic; the time itself agrees with tight RK integration
            warnings.simplefilter("ignore", IntegrationWarning)
            tau = quad(lambda s: 1.0 / g(s), y0, y_end, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
        if math.isfinite(tau) and 0 <= tau <= t_span:
            if ctl.record:
                _record_slide(g, y0, tau, ctl, traj, t0)
                traj.samples[-1] = (t0 + tau, 0.0, float(y_end), SLIDING)
            return tau, float(y_end), True
    horizon = t_span if math.isfinite(t_span) else 1e6
    sol = solve_ivp(lambda s, v: [g(v[0])], (0.0, horizon), [y0], method="RK45",
                    rtol=ctl.sliding_rtol, atol=1e-13)
    if ctl.record:
        traj.samples.extend((t0 + a, 0.0, float(b), SLIDING) for a, b in zip(sol.t, sol.y[0]))
    return float(sol.t[-1]), float(sol.y[0][-1]), False


def _default_horizon(sys: PWLFilippovSystem) -> float:
    oms = [_Half(sys, s).om for s in ("L", "R")]
    return 1000.0 * 2 * math.pi / min(oms)


def numeric_poincare(sys: PWLFilippovSystem, q: float, controls: SimControls | None = None,
                     t_max: float | None = None) -> tuple[float, bool]:
    """Next ordinate at which the forward orbit of (0, q) enters x > 0 again.

    Returns (P, via_sliding).  Raises MapUndefinedError when the orbit comes to
    rest at an equilibrium or pseudo-equilibrium first.
    """
    if not sys.f("R", 0.0, q) > 0:
        raise DomainError(f"orbit from (0, {q!r}) does not enter x>0")
    ctl = controls or SimControls(record=False)
    horizon = t_max if t_max is not None else _default_horizon(sys)
    traj = integrate(sys, 0.0, q, horizon, ctl, side=RIGHT, stop_on=lambda e: e.into == RIGHT)
    if traj.status != "stopped":
        raise MapUndefinedError(f"map undefined at q={q!r}: orbit ended with status {traj.status}")
    via = any(e.kind == "slide_enter" for e in traj.events)
    return traj.events[-1].y, via


def half_return(sys: PWLFilippovSystem, side: str, q: float, controls: SimControls | None = None):
    """(ordinate, time) of the first return to x = 0 from (0, q) through half ``side``."""
    ctl = controls or SimControls(record=False)
    mode = LEFT if side in ("L", LEFT) else RIGHT
    traj = integrate(sys, 0.0, q, _default_horizon(sys), ctl, side=mode, stop_on=lambda e: True)
    if traj.status != "stopped":
        raise MapUndefinedError(f"no return from (0, {q!r}) in the {mode} half-plane")
    ev = traj.events[0]
    return ev.y, ev.t
