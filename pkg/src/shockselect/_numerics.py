"""Bracketed root finding and adaptive quadrature shared by every module.

Root finds go through :func:`scipy.optimize.brentq` (bisection safeguarded
by inverse quadratic interpolation) and integrals through
:func:`scipy.integrate.quad` (adaptive Gauss-Kronrod).  Everything here
needs a verified sign change before it starts, so it cannot diverge.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import BracketError

QUAD_EPSABS = 1e-12
# brentq refuses rtol below 4 * machine epsilon
_RTOL = 4.0 * np.finfo(float).eps


def find_root(fn: Callable[[float], float], lo: float, hi: float,
              xtol: float = 1e-15) -> float:
    """Root of ``fn`` on ``[lo, hi]``; the endpoints must bracket a sign change."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError(
            f"no sign change on [{lo!r}, {hi!r}] (f={flo:.3e}, {fhi:.3e})",
            samples=[(lo, flo), (hi, fhi)])
    return brentq(fn, lo, hi, xtol=xtol, rtol=_RTOL, maxiter=500)


def scan_roots(fn: Callable[[float], float], lo: float, hi: float,
               n_intervals: int, xtol: float = 1e-15) -> list[float]:
    """All roots found by scanning ``n_intervals`` equal cells for sign changes.

    Roots that land exactly on a scan node are reported once.  Tangential
    roots without a sign change are not found; that is the usual price of
    a scan and callers only rely on transversal crossings.
    """
    xs = np.linspace(lo, hi, n_intervals + 1)
    vals = [fn(float(x)) for x in xs]
    roots: list[float] = []
    for i in range(n_intervals):
        a, b = float(xs[i]), float(xs[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            if not roots or roots[-1] != a:
                roots.append(a)
            continue
        if fb == 0.0:
            continue  # picked up as the left node of the next cell
        if (fa < 0.0) != (fb < 0.0):
            roots.append(brentq(fn, a, b, xtol=xtol, rtol=_RTOL, maxiter=500))
    if vals[-1] == 0.0 and (not roots or roots[-1] != float(xs[-1])):
        roots.append(float(xs[-1]))
    return roots


def integrate(fn: Callable[[float], float], lo: float, hi: float,
              epsabs: float = QUAD_EPSABS, points=None) -> float:
    """Adaptive quadrature of ``fn`` over ``[lo, hi]`` to absolute ``epsabs``."""
    if lo == hi:
        return 0.0
    value, _ = quad(fn, lo, hi, epsabs=epsabs, epsrel=1e-13, limit=200,
                    points=points)
    return float(value)
