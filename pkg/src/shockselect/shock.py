"""Shock positions under the classical selection rules.

Every admissible shock conserves the flux potential, ``Phi(u_l) = Phi(u_r)
= Phi_S`` with ``Phi(beta) <= Phi_S <= Phi(alpha)``, so a shock is fixed by
the single number ``Phi_S``.  The rules differ only in which ``Phi_S`` they
pick:

* equal area       -- integral of ``Phi - Phi_S`` over ``[u_l, u_r]`` vanishes
* continuous D     -- ``D(u_l) = D(u_r)``
* lower/upper knee -- ``u_r = beta`` / ``u_l = alpha``

All rules are solved by bracketing in ``Phi_S``; the knees supply brackets
of opposite sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._numerics import find_root, integrate, scan_roots
from .errors import InadmissibleModelError, PoleError
from .model import DECREASING_INCREASING, PotentialModel, as_potential, classify_shape

EQUAL_AREA = "equal-area"
CONTINUOUS_D = "continuous-D"
LOWER_KNEE = "lower-knee"
UPPER_KNEE = "upper-knee"
CUSTOM = "custom"

RULES = (EQUAL_AREA, CONTINUOUS_D, LOWER_KNEE, UPPER_KNEE, CUSTOM)

_SCAN_INTERVALS = 1000
# Phi range narrower than this makes every rule ill-conditioned
_MIN_PHI_RANGE = 1e-10
# |D| below this counts as sitting on a diffusivity zero
_POLE_TOL = 1e-14


@dataclass(frozen=True)
class ShockPosition:
    u_left: float
    u_right: float
    phi_s: float
    rule: str = CUSTOM

    @property
    def length(self) -> float:
        return self.u_right - self.u_left

    def check(self, model, tol: float = 1e-10) -> None:
        """Raise ``AssertionError`` if the shock breaks a structural invariant."""
        pot = as_potential(model)
        assert abs(float(pot.phi(self.u_left)) - self.phi_s) <= tol
        assert abs(float(pot.phi(self.u_right)) - self.phi_s) <= tol
        assert self.u_left <= pot.alpha and self.u_right >= pot.beta
        lo, hi = phi_range(pot)
        assert lo - tol <= self.phi_s <= hi + tol


def phi_range(model) -> tuple[float, float]:
    """``(Phi(beta), Phi(alpha))``, the admissible range of ``Phi_S``."""
    pot = as_potential(model)
    return float(pot.phi(pot.beta)), float(pot.phi(pot.alpha))


def _valid_range(pot: PotentialModel) -> tuple[float, float]:
    lo, hi = phi_range(pot)
    if hi - lo < _MIN_PHI_RANGE:
        raise InadmissibleModelError(
            f"Phi(alpha) - Phi(beta) = {hi - lo:.3e} is too small to resolve a shock")
    if float(pot.phi(0.0)) > lo or float(pot.phi(1.0)) < hi:
        raise InadmissibleModelError(
            "outer branches of Phi do not cover [Phi(beta), Phi(alpha)]")
    return lo, hi


def endpoints_for_phi(model, phi_s: float) -> tuple[float, float]:
    """Shock endpoints ``(u_l, u_r)`` conserving ``Phi_S``.

    ``Phi`` is strictly increasing on ``[0, alpha]`` and ``[beta, 1]`` (D is
    positive there), so each branch holds exactly one solution.
    """
    pot = as_potential(model)
    lo, hi = _valid_range(pot)
    if not lo <= phi_s <= hi:
        raise ValueError(f"Phi_S={phi_s!r} outside [{lo!r}, {hi!r}]")
    fn = lambda u: float(pot.phi(u)) - phi_s
    u_left = pot.alpha if phi_s == hi else find_root(fn, 0.0, pot.alpha)
    u_right = pot.beta if phi_s == lo else find_root(fn, pot.beta, 1.0)
    return u_left, u_right


def shock_at(model, phi_s: float, rule: str = CUSTOM) -> ShockPosition:
    ul, ur = endpoints_for_phi(model, phi_s)
    return ShockPosition(ul, ur, float(phi_s), rule)


def area_residual(model, u_left: float, u_right: float, phi_s: float,
                  weight: Callable | None = None) -> float:
    """Integral of ``(Phi(u) - Phi_S) / weight(u)`` over ``[u_left, u_right]``.

    ``weight=None`` is the plain equal-area integral and shares this code
    path with the weighted rule, so the two agree bit for bit when the
    weight is identically one.
    """
    pot = as_potential(model)
    if weight is None:
        integrand = lambda u: float(pot.phi(u)) - phi_s
    else:
        integrand = lambda u: (float(pot.phi(u)) - phi_s) / float(weight(u))
    return integrate(integrand, u_left, u_right)


def equal_area_integral_exact(model, u_left: float, u_right: float, phi_s: float) -> float:
    """Same integral as :func:`area_residual` with no weight, from the exact antiderivative."""
    pot = as_potential(model)
    return float(pot.phi_antiderivative(u_right) - pot.phi_antiderivative(u_left)
                 - phi_s * (u_right - u_left))


def solve_area_rule(model, weight: Callable | None = None, rule: str = CUSTOM) -> ShockPosition:
    """Shock whose (weighted) area residual vanishes.

    At the upper knee ``Phi <= Phi_S`` on the whole shock, at the lower knee
    ``Phi >= Phi_S``; a positive weight keeps those signs, so the knees
    bracket a root.
    """
    pot = as_potential(model)
    lo, hi = _valid_range(pot)

    def residual(phi_s):
        ul, ur = endpoints_for_phi(pot, phi_s)
        return area_residual(pot, ul, ur, phi_s, weight)

    phi_s = find_root(residual, lo, hi, xtol=1e-18)
    return shock_at(pot, phi_s, rule)


def equal_area_shock(model) -> ShockPosition:
    return solve_area_rule(model, None, EQUAL_AREA)


def diffusivity_mismatch(model, phi_s: float) -> float:
    """``D(u_r) - D(u_l)`` at the shock conserving ``Phi_S``."""
    pot = as_potential(model)
    ul, ur = endpoints_for_phi(pot, phi_s)
    return float(pot.d(ur) - pot.d(ul))


def continuous_diffusivity_shocks(model) -> list[ShockPosition]:
    """Every continuous-diffusivity shock, ordered by ``Phi_S``.

    Decreasing-increasing models have exactly one and the knee bracket is
    enough.  Otherwise ``Phi_S`` is scanned on 1000 cells for sign changes.
    """
    pot = as_potential(model)
    lo, hi = _valid_range(pot)
    fn = lambda s: diffusivity_mismatch(pot, s)
    if classify_shape(pot) == DECREASING_INCREASING:
        roots = [find_root(fn, lo, hi, xtol=1e-18)]
    else:
        roots = scan_roots(fn, lo, hi, _SCAN_INTERVALS, xtol=1e-18)
    # the knees themselves are zeros of the mismatch only when D vanishes at both ends
    return [shock_at(pot, s, CONTINUOUS_D) for s in roots if lo < s < hi]


def continuous_diffusivity_shock(model) -> ShockPosition:
    """The continuous-diffusivity shock; the longest one if there are several."""
    shocks = continuous_diffusivity_shocks(model)
    if not shocks:
        raise InadmissibleModelError("no continuous-diffusivity shock found")
    return max(shocks, key=lambda s: s.length)


def knee_shocks(model) -> tuple[ShockPosition, ShockPosition]:
    """``(lower, upper)``: lower has ``u_r = beta``, upper has ``u_l = alpha``."""
    pot = as_potential(model)
    lo, hi = _valid_range(pot)
    return shock_at(pot, lo, LOWER_KNEE), shock_at(pot, hi, UPPER_KNEE)


def all_rule_shocks(model) -> list[ShockPosition]:
    """The four reference shocks in increasing ``Phi_S``: lower knee, two rules, upper knee."""
    lower, upper = knee_shocks(model)
    shocks = [lower, equal_area_shock(model), continuous_diffusivity_shock(model), upper]
    return sorted(shocks, key=lambda s: s.phi_s)


class ShockFamily:
    """All Phi-conserving shocks of one model, parameterised by ``Phi_S``."""

    def __init__(self, model):
        self.potential = as_potential(model)
        self.phi_min, self.phi_max = _valid_range(self.potential)

    def endpoints(self, phi_s: float) -> tuple[float, float]:
        return endpoints_for_phi(self.potential, phi_s)

    def u_left(self, phi_s: float) -> float:
        return self.endpoints(phi_s)[0]

    def u_right(self, phi_s: float) -> float:
        return self.endpoints(phi_s)[1]

    def length(self, phi_s: float) -> float:
        ul, ur = self.endpoints(phi_s)
        return ur - ul

    def length_derivative(self, phi_s: float) -> float:
        """``1/D(u_r) - 1/D(u_l)``; raises :class:`PoleError` at a knee."""
        ul, ur = self.endpoints(phi_s)
        dl, dr = float(self.potential.d(ul)), float(self.potential.d(ur))
        if abs(dl) < _POLE_TOL or abs(dr) < _POLE_TOL:
            raise PoleError(f"shock-length derivative has a pole at Phi_S={phi_s!r}")
        return 1.0 / dr - 1.0 / dl

    def length_second_derivative(self, phi_s: float) -> float:
        ul, ur = self.endpoints(phi_s)
        dl, dr = float(self.potential.d(ul)), float(self.potential.d(ur))
        if abs(dl) < _POLE_TOL or abs(dr) < _POLE_TOL:
            raise PoleError(f"shock-length curvature has a pole at Phi_S={phi_s!r}")
        return (float(self.potential.d_prime(ul)) / dl**3
                - float(self.potential.d_prime(ur)) / dr**3)

    def table(self, n: int = 1001) -> np.ndarray:
        """Rows ``(Phi_S, u_l, u_r, S_L)`` on ``n`` equally spaced ``Phi_S`` values."""
        rows = []
        for s in np.linspace(self.phi_min, self.phi_max, n):
            ul, ur = self.endpoints(float(s))
            rows.append((float(s), ul, ur, ur - ul))
        return np.array(rows)


def shock_length(model, phi_s: float) -> float:
    return ShockFamily(model).length(phi_s)


def shock_length_derivative(model, phi_s: float) -> float:
    return ShockFamily(model).length_derivative(phi_s)


MAXIMUM = "maximum"
MINIMUM = "minimum"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class LengthExtremum:
    phi_s: float
    kind: str
    length: float
    global_max: bool = False


def shock_length_extrema(model) -> list[LengthExtremum]:
    """Critical points of the shock length, classified by its second derivative.

    Critical points are exactly the continuous-diffusivity shocks, so this
    reuses that solver.  The longest maximum is flagged ``global_max``.
    """
    fam = ShockFamily(model)
    out = []
    for shock in continuous_diffusivity_shocks(fam.potential):
        curv = fam.length_second_derivative(shock.phi_s)
        kind = MAXIMUM if curv < 0 else MINIMUM if curv > 0 else DEGENERATE
        out.append(LengthExtremum(shock.phi_s, kind, shock.length))
    maxima = [e for e in out if e.kind == MAXIMUM]
    if maxima:
        best = max(maxima, key=lambda e: e.length)
        out = [LengthExtremum(e.phi_s, e.kind, e.length, e is best) for e in out]
    return out
