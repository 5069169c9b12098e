"""Vectorised safeguarded Newton iteration on sign-change brackets."""
from __future__ import annotations

import numpy as np

_EPS = np.finfo(float).eps


def bracketed_newton(f, df, lo, hi, sign_lo, *, ftol=1e-12, max_iter=200):
    """Roots of ``f`` in the open brackets (lo, hi), elementwise.

    ``sign_lo`` is the sign of ``f`` just inside ``lo`` (scalar or array); the
    endpoints themselves are never evaluated, so f may vanish there.  Each
    iterate is a Newton step when it stays inside the current bracket and
    halves it otherwise.  An element stops when |f| <= ftol or its bracket is
    down to a few ulps.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    sign_lo = np.broadcast_to(np.sign(sign_lo), lo.shape)
    x = 0.5 * (lo + hi)
    done = np.zeros(lo.shape, dtype=bool)
    for _ in range(max_iter):
        fx = f(x)
        same = np.sign(fx) == sign_lo
        lo = np.where(same & ~done, x, lo)
        hi = np.where(~same & ~done, x, hi)
        width = hi - lo
        done |= (np.abs(fx) <= ftol) | (width <= 4 * _EPS * np.maximum(np.abs(x), 1e-300))
        if done.all():
            break
        d = df(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - fx / d
        newton_ok = np.isfinite(xn) & (xn > lo) & (xn < hi)
        # Newton must at least halve the bracket's distance scale, otherwise bisect
        newton_ok &= np.abs(xn - x) < 0.5 * width
        stalled = newton_ok & (np.abs(xn - x) <= 2 * _EPS * np.abs(x))
        x = np.where(done, x, np.where(newton_ok, xn, 0.5 * (lo + hi)))
        done |= stalled
    return x


def bisect_scalar(f, lo, hi, *, ftol=0.0, max_iter=200):
    """Plain bisection for a scalar function with f(lo), f(hi) of opposite sign."""
    flo = f(lo)
    if flo == 0:
        return lo
    fhi = f(hi)
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError("bracket does not contain a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if abs(fm) <= ftol:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
