"""Diffusivities, flux potentials and reaction terms.

A diffusivity here is a polynomial ``D(u)`` on ``[0, 1]`` that is positive,
then negative on ``(alpha, beta)``, then positive again.  The cubic family

    D(u) = (u - a)(u - b - delta u^2)

is the workhorse; ``delta = 0`` gives a quadratic symmetric about
``(a + b) / 2``.  Arbitrary polynomials are accepted as long as they have
the same sign pattern.  The flux potential ``Phi`` is the antiderivative of
``D`` with ``Phi(0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from ._numerics import find_root
from .errors import DomainError, InadmissibleModelError

CUBIC = "cubic"
POLYNOMIAL = "polynomial"

DECREASING_INCREASING = "decreasing-increasing"
GENERAL = "general"

_SCAN_STEP = 1e-3
_ZERO_XTOL = 1e-14
_SAMPLES = 1000


def _check_density(u, what: str = "u"):
    arr = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{what} must lie in [0, 1], got {u!r}")
    return arr


@dataclass(frozen=True)
class DiffusivityModel:
    """Admissible diffusivity with its two interior zeros cached.

    Build with :meth:`cubic` or :meth:`polynomial`.  Construction fails with
    :class:`InadmissibleModelError` unless ``D(0) > 0``, ``D(1) > 0`` and
    ``D`` changes sign exactly twice inside ``(0, 1)``.
    """

    family: str
    coeffs: tuple[float, ...]
    a: float | None = None
    b: float | None = None
    delta: float | None = None
    alpha: float = field(init=False)
    beta: float = field(init=False)

    @classmethod
    def cubic(cls, a: float, b: float, delta: float = 0.0) -> "DiffusivityModel":
        a, b, delta = float(a), float(b), float(delta)
        coeffs = (a * b, -(a + b), 1.0 + a * delta, -delta)
        return cls(CUBIC, coeffs, a=a, b=b, delta=delta)

    @classmethod
    def polynomial(cls, coeffs) -> "DiffusivityModel":
        coeffs = tuple(float(c) for c in coeffs)
        if len(coeffs) < 3:
            raise InadmissibleModelError("need at least a quadratic for two zeros")
        return cls(POLYNOMIAL, coeffs)

    def __post_init__(self):
        if self.family not in (CUBIC, POLYNOMIAL):
            raise InadmissibleModelError(f"unknown diffusivity family {self.family!r}")
        alpha, beta = _locate_zeros(self)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        _check_sign_pattern(self)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def d(self, u):
        """D(u), vectorised and unchecked (simulations may overshoot [0, 1])."""
        u = np.asarray(u, dtype=float)
        if self.family == CUBIC:
            return (u - self.a) * (u - self.b - self.delta * u * u)
        return npoly.polyval(u, self.coeffs)

    def d_prime(self, u):
        return npoly.polyval(np.asarray(u, dtype=float), npoly.polyder(self.coeffs))

    def derivative(self, u, order: int = 1):
        """order-th derivative of D at u (order 0 is D itself)."""
        if order == 0:
            return self.d(u)
        return npoly.polyval(np.asarray(u, dtype=float), npoly.polyder(self.coeffs, order))


def _locate_zeros(model: DiffusivityModel) -> tuple[float, float]:
    d0, d1 = float(model.d(0.0)), float(model.d(1.0))
    if not (d0 > 0.0 and d1 > 0.0):
        raise InadmissibleModelError(
            f"need D(0) > 0 and D(1) > 0, got D(0)={d0:.6g}, D(1)={d1:.6g}")
    n = int(round(1.0 / _SCAN_STEP))
    grid = np.linspace(0.0, 1.0, n + 1)
    vals = model.d(grid)
    negative = vals < 0.0
    changes = np.flatnonzero(negative[:-1] != negative[1:])
    if len(changes) != 2:
        raise InadmissibleModelError(
            f"D must change sign exactly twice in (0, 1); found {len(changes)}")
    fn = lambda x: float(model.d(x))
    zeros = [find_root(fn, float(grid[i]), float(grid[i + 1]), xtol=_ZERO_XTOL)
             for i in changes]
    if model.family == CUBIC:
        zeros = _cross_check_cubic(model, zeros)
    alpha, beta = zeros
    if not 0.0 < alpha < beta < 1.0:
        raise InadmissibleModelError(f"zeros out of order: {alpha!r}, {beta!r}")
    return alpha, beta


def _cross_check_cubic(model: DiffusivityModel, scanned: list[float]) -> list[float]:
    # Closed-form zeros are preferred only when the scan agrees with them.
    candidates = [model.a]
    if model.delta == 0.0:
        candidates.append(model.b)
    else:
        disc = 1.0 - 4.0 * model.b * model.delta
        if disc >= 0.0:
            root = math.sqrt(disc)
            candidates += [(1.0 - root) / (2.0 * model.delta),
                           (1.0 + root) / (2.0 * model.delta)]
    out = []
    for z in scanned:
        best = min(candidates, key=lambda c: abs(c - z))
        if abs(best - z) <= 1e-9 and abs(float(model.d(best))) <= abs(float(model.d(z))) + 1e-15:
            out.append(float(best))
        else:
            out.append(z)
    return out


def _check_sign_pattern(model: DiffusivityModel) -> None:
    def interior(lo, hi):
        return np.linspace(lo, hi, _SAMPLES + 2)[1:-1]

    if np.any(model.d(interior(0.0, model.alpha)) <= 0.0):
        raise InadmissibleModelError("D must be positive on (0, alpha)")
    if np.any(model.d(interior(model.alpha, model.beta)) >= 0.0):
        raise InadmissibleModelError("D must be negative on (alpha, beta)")
    if np.any(model.d(interior(model.beta, 1.0)) <= 0.0):
        raise InadmissibleModelError("D must be positive on (beta, 1)")


@dataclass(frozen=True)
class PotentialModel:
    """Flux potential Phi(u) = integral of D from 0, so Phi(0) = 0."""

    diffusivity: DiffusivityModel
    coeffs: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs",
                           tuple(npoly.polyint(self.diffusivity.coeffs, lbnd=0.0)))

    @property
    def alpha(self) -> float:
        return self.diffusivity.alpha

    @property
    def beta(self) -> float:
        return self.diffusivity.beta

    def phi(self, u):
        u = np.asarray(u, dtype=float)
        m = self.diffusivity
        if m.family == CUBIC:
            a, b, dl = m.a, m.b, m.delta
            return u * (-3 * dl * u**3 + 4 * a * dl * u**2 + 4 * u**2
                        - 6 * a * u - 6 * b * u + 12 * a * b) / 12.0
        return npoly.polyval(u, self.coeffs)

    def d(self, u):
        return self.diffusivity.d(u)

    def d_prime(self, u):
        return self.diffusivity.d_prime(u)

    def derivative(self, u, order: int):
        """order-th derivative of Phi, from exact coefficient differentiation."""
        if order == 0:
            return self.phi(u)
        return npoly.polyval(np.asarray(u, dtype=float), npoly.polyder(self.coeffs, order))

    def phi_antiderivative(self, u):
        """Integral of Phi from 0 to u (exact)."""
        return npoly.polyval(np.asarray(u, dtype=float), npoly.polyint(self.coeffs, lbnd=0.0))


def as_potential(model) -> PotentialModel:
    if isinstance(model, PotentialModel):
        return model
    if isinstance(model, DiffusivityModel):
        return PotentialModel(model)
    raise TypeError(f"expected a diffusivity or potential model, got {type(model).__name__}")


def eval_diffusivity(model, u) -> float:
    _check_density(u)
    m = model.diffusivity if isinstance(model, PotentialModel) else model
    return float(m.d(u))


def eval_potential(model, u) -> float:
    _check_density(u)
    return float(as_potential(model).phi(u))


def find_diffusivity_zeros(model) -> tuple[float, float]:
    m = model.diffusivity if isinstance(model, PotentialModel) else model
    return m.alpha, m.beta


def classify_shape(model) -> str:
    """``"decreasing-increasing"`` if D' <= 0 on [0, alpha] and D' >= 0 on [beta, 1]."""
    m = model.diffusivity if isinstance(model, PotentialModel) else model
    left = m.d_prime(np.linspace(0.0, m.alpha, _SAMPLES))
    right = m.d_prime(np.linspace(m.beta, 1.0, _SAMPLES))
    # tolerance only absorbs rounding at a flat vertex
    if np.all(left <= 1e-12) and np.all(right >= -1e-12):
        return DECREASING_INCREASING
    return GENERAL


def oscillatory_example() -> DiffusivityModel:
    """Illustrative diffusivity that is not decreasing-increasing.

    ``(u - 0.45)(u - 0.7)(1 + 0.9 T7(2u - 1))`` with ``T7`` the degree-7
    Chebyshev polynomial.  Its shock-length curve has three critical points
    (two maxima, one minimum) and therefore three continuous-diffusivity
    shocks.
    """
    return DiffusivityModel.polynomial(
        (0.315, -3.1345, 8.245, 9.576, -57.96, 18.648, 115.92, -82.656, -66.24, 57.6))


ZERO = "zero"


@dataclass(frozen=True)
class ReactionModel:
    """Reaction term: ``"zero"`` or the bistable ``u (1 - u)(u - gamma)``."""

    family: str = CUBIC
    gamma: float = 0.5

    def __post_init__(self):
        if self.family not in (ZERO, CUBIC):
            raise InadmissibleModelError(f"unknown reaction family {self.family!r}")
        if self.family == CUBIC and not 0.0 < self.gamma < 1.0:
            raise InadmissibleModelError(f"gamma must lie in (0, 1), got {self.gamma!r}")

    @classmethod
    def zero(cls) -> "ReactionModel":
        return cls(ZERO, 0.0)

    def r(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == ZERO:
            return np.zeros_like(u)
        return u * (1.0 - u) * (u - self.gamma)

    def r_prime(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == ZERO:
            return np.zeros_like(u)
        g = self.gamma
        return -3.0 * u * u + 2.0 * (1.0 + g) * u - g


def eval_reaction(model: ReactionModel, u) -> float:
    _check_density(u)
    return float(model.r(u))
