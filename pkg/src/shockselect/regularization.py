"""Modified equal-area rule for the nonlinear regularisation.

With the regulariser ``-eps^2 (f(u) u_xx)_xx`` the selected shock satisfies

    integral over [u_l, u_r] of (Phi(u) - Phi_S) / f(u) du = 0

for a positive weight ``f``.  Weights come in three parameterised families:
constant ``1``, exponential ``exp(-A u)`` and quadratic ``1 + A u^2``.  The
exponential case also has a closed form for polynomial ``D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from ._numerics import find_root, integrate
from .errors import BracketError, PositivityError
from .model import as_potential
from .shock import CUSTOM, EQUAL_AREA, ShockPosition, area_residual, solve_area_rule

CONSTANT = "constant"
EXPONENTIAL = "exponential"
QUADRATIC = "quadratic"
FAMILIES = (CONSTANT, EXPONENTIAL, QUADRATIC)

_SAMPLES = 1000
# |G(0)| at or below this means the unweighted rule already holds
_ZERO_RESIDUAL = 1e-14
_A_LIMIT = 200.0


@dataclass(frozen=True)
class RegularisationWeight:
    """Positive weight ``f(u)`` in the regulariser and in the modified rule.

    Built-in families are checked for positivity on ``[0, 1]`` at
    construction.  :meth:`custom` wraps arbitrary callables; those are only
    checked on the interval they are used on.
    """

    family: str = CONSTANT
    A: float = 0.0
    fn: Callable | None = field(default=None, compare=False, repr=False)
    fn_prime: Callable | None = field(default=None, compare=False, repr=False)
    name: str | None = None

    def __post_init__(self):
        if self.family == CUSTOM:
            if self.fn is None or self.fn_prime is None:
                raise ValueError("custom weights need fn and fn_prime")
            return
        if self.family not in FAMILIES:
            raise ValueError(f"unknown weight family {self.family!r}")
        object.__setattr__(self, "A", float(self.A))
        if self.family == QUADRATIC and not self.A > -1.0:
            raise PositivityError(f"quadratic weight needs A > -1, got {self.A!r}")
        check_positive(self, 0.0, 1.0)

    @classmethod
    def constant(cls) -> "RegularisationWeight":
        return cls(CONSTANT, 0.0)

    @classmethod
    def exponential(cls, A: float) -> "RegularisationWeight":
        return cls(EXPONENTIAL, A)

    @classmethod
    def quadratic(cls, A: float) -> "RegularisationWeight":
        return cls(QUADRATIC, A)

    @classmethod
    def custom(cls, fn: Callable, fn_prime: Callable, name: str = "custom") -> "RegularisationWeight":
        return cls(CUSTOM, 0.0, fn, fn_prime, name)

    def f(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == CONSTANT:
            return np.ones_like(u)
        if self.family == EXPONENTIAL:
            return np.exp(-self.A * u)
        if self.family == QUADRATIC:
            return 1.0 + self.A * u * u
        return np.asarray(self.fn(u), dtype=float)

    def f_prime(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == CONSTANT:
            return np.zeros_like(u)
        if self.family == EXPONENTIAL:
            return -self.A * np.exp(-self.A * u)
        if self.family == QUADRATIC:
            return 2.0 * self.A * u
        return np.asarray(self.fn_prime(u), dtype=float)

    def __call__(self, u):
        return self.f(u)

    def label(self) -> str:
        if self.family == CUSTOM:
            return self.name or CUSTOM
        return f"{self.family}(A={self.A!r})"


def weight_for(family: str, A: float = 0.0) -> RegularisationWeight:
    return RegularisationWeight(family, 0.0 if family == CONSTANT else A)


def check_positive(weight: RegularisationWeight, lo: float, hi: float,
                   derivative: bool = False) -> None:
    u = np.linspace(lo, hi, _SAMPLES)
    if np.any(~(weight.f(u) > 0.0)):
        raise PositivityError(f"weight {weight.label()} is not positive on [{lo}, {hi}]")
    if derivative and np.any(~(weight.f_prime(u) > 0.0)):
        raise PositivityError(
            f"derivative of weight {weight.label()} is not positive on [{lo}, {hi}]")


def modified_area_integral(model, shock: ShockPosition, weight: RegularisationWeight) -> float:
    """Integral of ``(Phi - Phi_S) / f`` over the shock, by adaptive quadrature."""
    check_positive(weight, shock.u_left, shock.u_right)
    w = None if weight.family == CONSTANT else weight.f
    return area_residual(model, shock.u_left, shock.u_right, shock.phi_s, w)


def modified_area_closed_form_exponential(model, shock: ShockPosition, A: float) -> float:
    """Closed-form modified area for ``f = exp(-A u)`` and polynomial ``D``.

    Uses repeated integration by parts,

        e^{A u_r}/A sum_i (-1)^i Phi^(i)(u_r)/A^i - (same at u_l),  i = 1..n+1,

    with ``n`` the degree of ``D``.  The two sums cancel to leading order
    when ``|A|`` is small, so they are evaluated in extended precision
    with enough guard digits to absorb the cancellation.  ``A = 0`` falls
    back to the exact unweighted integral.
    """
    pot = as_potential(model)
    if A == 0.0:
        from .shock import equal_area_integral_exact
        return equal_area_integral_exact(pot, shock.u_left, shock.u_right, shock.phi_s)
    n = pot.diffusivity.degree
    coeffs = pot.coeffs
    lost = (n + 2) * max(0.0, -math.log10(abs(A)))
    with mpmath.workdps(int(30 + lost)):
        a = mpmath.mpf(A)

        def tail(u):
            u = mpmath.mpf(u)
            total = mpmath.mpf(0)
            for i in range(1, n + 2):
                total += (-1) ** i * _poly_derivative_mp(coeffs, i, u) / a**i
            return mpmath.exp(a * u) / a * total

        return float(tail(shock.u_right) - tail(shock.u_left))


def _poly_derivative_mp(coeffs, order: int, u):
    # exact differentiation of the power-basis coefficients
    total = mpmath.mpf(0)
    for k in range(order, len(coeffs)):
        factor = 1
        for j in range(k - order + 1, k + 1):
            factor *= j
        total += factor * mpmath.mpf(coeffs[k]) * u ** (k - order)
    return total


@dataclass(frozen=True)
class WeightSolution:
    A: float
    family: str
    residual: float
    bracket: tuple[float, float]
    samples: list = field(default_factory=list, compare=False, repr=False)


def _scan_points(family: str) -> tuple[list[float], list[float]]:
    pos = [0.5 * 2**k for k in range(9)] + [_A_LIMIT]  # 0.5 .. 128, 200
    if family == QUADRATIC:
        neg = [-1.0 + 2.0**-k for k in range(1, 40)]
    else:
        neg = [-p for p in pos]
    return pos, neg


def solve_weight_parameter(model, shock: ShockPosition, family: str = EXPONENTIAL,
                           tol: float = 1e-10) -> WeightSolution:
    """Weight parameter ``A`` for which ``shock`` satisfies the modified rule.

    ``G(A)`` (the modified area as a function of ``A``) is scanned on
    ``0, +-0.5, +-1, +-2, ... , +-200`` (quadratic family: ``A > -1`` only)
    outward from zero until it changes sign; the bracket is then refined.
    Requires ``D > 0`` at both endpoints, which is what makes the two tails
    of ``G`` differ in sign.
    """
    pot = as_potential(model)
    if family not in (EXPONENTIAL, QUADRATIC):
        raise ValueError(f"can only solve for A in the exponential or quadratic family, not {family!r}")
    if not (float(pot.d(shock.u_left)) > 0.0 and float(pot.d(shock.u_right)) > 0.0):
        raise ValueError("need D(u_l) > 0 and D(u_r) > 0")

    def G(A):
        return modified_area_integral(pot, shock, RegularisationWeight(family, A))

    g0 = G(0.0)
    samples = [(0.0, g0)]
    if abs(g0) <= _ZERO_RESIDUAL:
        return WeightSolution(0.0, family, g0, (0.0, 0.0), samples)
    pos, neg = _scan_points(family)
    brackets = []
    for side in (pos, neg):
        prev_a, prev_g = 0.0, g0
        for a in side:
            g = G(a)
            samples.append((a, g))
            if (g < 0.0) != (prev_g < 0.0) or g == 0.0:
                brackets.append((prev_a, a))
                break
            prev_a, prev_g = a, g
    if not brackets:
        samples.sort()
        raise BracketError(f"G(A) does not change sign for |A| <= {_A_LIMIT}", samples)
    # the bracket nearest A = 0 gives the mildest weight
    lo, hi = min(brackets, key=lambda br: abs(br[1]))
    A = find_root(G, min(lo, hi), max(lo, hi), xtol=1e-14)
    res = G(A)
    if abs(res) > tol:
        raise BracketError(f"residual {res:.3e} above tolerance at A={A!r}", samples)
    samples.sort()
    return WeightSolution(A, family, res, (min(lo, hi), max(lo, hi)), samples)


def shock_for_weight(model, weight: RegularisationWeight) -> ShockPosition:
    """Shock selected by the modified equal-area rule for ``weight``."""
    check_positive(weight, 0.0, 1.0)
    if weight.family == CONSTANT:
        return solve_area_rule(model, None, EQUAL_AREA)
    return solve_area_rule(model, weight.f, CUSTOM)


def flux_weighted_potential(model, weight: RegularisationWeight, u: float) -> float:
    """``Psi(u)``: integral of ``D / f`` from 0 to ``u``."""
    pot = as_potential(model)
    return integrate(lambda s: float(pot.d(s)) / float(weight.f(s)), 0.0, u)


def flux_weighted_jump(model, shock: ShockPosition, weight: RegularisationWeight) -> float:
    """``Psi(u_r) - Psi(u_l)``; zero when the shock also conserves ``Psi``."""
    check_positive(weight, shock.u_left, shock.u_right)
    pot = as_potential(model)
    return integrate(lambda s: float(pot.d(s)) / float(weight.f(s)),
                     shock.u_left, shock.u_right)


def alt_rule_flux_weighted(model, shock: ShockPosition, weight: RegularisationWeight) -> float:
    """Equal-area residual in ``Psi`` for the ``(f u_xxx)_x`` regulariser.

    That regulariser conserves ``Psi`` (not ``Phi``) across the shock and
    asks for ``integral of (Psi - Psi_S) du = 0``.  For a shock that does not
    conserve ``Psi`` the level ``Psi_S`` is ambiguous; the mean of the two
    endpoint values is used, which reduces to ``Phi_S`` for constant ``f``.
    Diagnostic only; see :func:`flux_weighted_jump` for the jump itself.
    """
    check_positive(weight, shock.u_left, shock.u_right)
    pot = as_potential(model)
    inv_f = lambda s: float(pot.d(s)) / float(weight.f(s))
    psi_left = integrate(inv_f, 0.0, shock.u_left)
    psi_right = psi_left + integrate(inv_f, shock.u_left, shock.u_right)
    psi_s = 0.5 * (psi_left + psi_right)
    # Psi(u) - Psi_S = (Psi(u) - Psi(u_l)) + (Psi(u_l) - Psi_S)
    offset = psi_left - psi_s

    def integrand(u):
        return integrate(inv_f, shock.u_left, u) + offset

    return integrate(integrand, shock.u_left, shock.u_right, epsabs=1e-13)


def alt_rule_fprime_weighted(model, shock: ShockPosition, weight: RegularisationWeight) -> float:
    """Integral of ``f'(u) (Phi(u) - Phi_S)`` for the ``-eps^2 f(u)_xxxx`` regulariser."""
    check_positive(weight, shock.u_left, shock.u_right, derivative=True)
    pot = as_potential(model)
    return integrate(lambda s: float(weight.f_prime(s)) * (float(pot.phi(s)) - shock.phi_s),
                     shock.u_left, shock.u_right)
