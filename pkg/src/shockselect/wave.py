"""Travelling waves through the shock: reduced phase plane and layer problem.

In the travelling frame ``z = x - c t`` the wave away from the shock obeys
the reduced problem, which after the rescaling ``d psi = d z / D(u)`` reads

    du/dpsi = -p - c u,        dp/dpsi = R(u) D(u).

Its equilibria are ``(0, 0)``, ``(gamma, -c gamma)`` and ``(1, -c)``.  The
wave leaves ``(1, -c)`` along its unstable manifold, jumps across the shock
at constant ``p`` and enters ``(0, 0)`` along its stable manifold.  For a
fixed shock position that only happens at one speed ``c``: the root of

    Delta p(c) = p(u_r) - p(u_l).

Inside the shock the layer problem ``u' = w, w' = (v + Phi(u)) / f(u)`` is
Hamiltonian with ``H = -w^2/2 + v F(u) + G(u)``; ``F`` and ``G`` are
antiderivatives of ``1/f`` and ``Phi/f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ._numerics import find_root, integrate
from .errors import BracketError, InadmissibleModelError, ShootingEscapeError, SolverError
from .model import ZERO, ReactionModel, as_potential
from .regularization import RegularisationWeight
from .shock import ShockPosition

SEED_OFFSET = 1e-8
ODE_RTOL = 1e-10
ODE_ATOL = 1e-13
SPEED_TOL = 1e-10
_PSI_SPAN = 1e5
_P_BOUND = 10.0


@dataclass(frozen=True)
class PhasePoint:
    u: float
    p: float
    w: float | None = None
    v: float | None = None


def critical_manifold_point(model, u: float, p: float = 0.0) -> PhasePoint:
    """Point on the critical manifold ``w = 0, v = -Phi(u)``."""
    pot = as_potential(model)
    return PhasePoint(u, p, 0.0, -float(pot.phi(u)))


def equilibria(c: float, model, reaction: ReactionModel) -> dict[str, PhasePoint]:
    """Rest states ``u0``, ``u_gamma`` and ``u1`` of the travelling-wave system."""
    out = {"u0": critical_manifold_point(model, 0.0, 0.0),
           "u1": critical_manifold_point(model, 1.0, -c)}
    if reaction.family != ZERO:
        g = reaction.gamma
        out["u_gamma"] = critical_manifold_point(model, g, -c * g)
    return out


def desingularised_rhs(u, p, c: float, model, reaction: ReactionModel):
    """``(du/dpsi, dp/dpsi) = (-p - c u, R(u) D(u))``."""
    pot = as_potential(model)
    return -p - c * u, reaction.r(u) * pot.d(u)


def jacobian(u: float, c: float, model, reaction: ReactionModel) -> np.ndarray:
    """Linearisation of the desingularised system, variables ordered ``(u, p)``."""
    pot = as_potential(model)
    drd = float(reaction.r_prime(u) * pot.d(u) + reaction.r(u) * pot.d_prime(u))
    return np.array([[-c, -1.0], [drd, 0.0]])


@dataclass(frozen=True)
class SaddleInfo:
    point: tuple[float, float]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray   # columns
    direction: np.ndarray      # unit vector of the manifold the wave uses
    kind: str                  # "unstable" (at u1) or "stable" (at u0)


def saddle_directions(which: str, c: float, model, reaction: ReactionModel) -> SaddleInfo:
    """Eigen-structure at ``u1`` (``which="u1"``) or ``u0`` (``which="u0"``).

    The returned direction points into ``0 < u < 1``: the unstable
    direction at ``u1`` and the stable direction at ``u0``.
    """
    if which == "u1":
        point, kind = (1.0, -c), "unstable"
    elif which == "u0":
        point, kind = (0.0, 0.0), "stable"
    else:
        raise ValueError(f"which must be 'u0' or 'u1', not {which!r}")
    J = jacobian(point[0], c, model, reaction)
    if not np.linalg.det(J) < 0.0:
        raise InadmissibleModelError(f"{which} is not a saddle (det J = {np.linalg.det(J):.3e})")
    lam, vecs = np.linalg.eig(J)
    lam, vecs = lam.real, vecs.real
    idx = int(np.argmax(lam)) if kind == "unstable" else int(np.argmin(lam))
    vec = vecs[:, idx] / np.linalg.norm(vecs[:, idx])
    inward = -1.0 if which == "u1" else 1.0
    if vec[0] * inward < 0.0:
        vec = -vec
    return SaddleInfo(point, lam, vecs, vec, kind)


@dataclass
class Trajectory:
    psi: np.ndarray
    u: np.ndarray
    p: np.ndarray

    def rows(self):
        return np.column_stack([self.psi, self.u, self.p])


@dataclass
class ShotResult:
    c: float
    p_at_ur: float
    p_at_ul: float
    unstable: Trajectory   # from u1 down to u = u_r
    stable: Trajectory     # from u0 (backwards) up to u = u_l

    @property
    def mismatch(self) -> float:
        return self.p_at_ur - self.p_at_ul


def _shoot_one(info: SaddleInfo, target: float, c: float, pot, reaction,
               eps_off: float, direction: float) -> Trajectory:
    y0 = np.asarray(info.point) + eps_off * info.direction

    def rhs(_, y):
        du, dp = desingularised_rhs(y[0], y[1], c, pot, reaction)
        return [du, dp]

    def hit(_, y):
        return y[0] - target
    hit.terminal = True

    def escape(_, y):
        # positive inside the box, crosses zero when the trajectory leaves it
        return min(y[0] + 1e-6, 1.0 + 1e-6 - y[0], _P_BOUND - abs(y[1]))
    escape.terminal = True

    sol = solve_ivp(rhs, (0.0, direction * _PSI_SPAN), y0, method="DOP853",
                    events=(hit, escape), rtol=ODE_RTOL, atol=ODE_ATOL, dense_output=False)
    if len(sol.t_events[0]):
        psi_hit = sol.t_events[0][0]
        y_hit = sol.y_events[0][0]
        psi = np.append(sol.t, psi_hit)
        ys = np.column_stack([sol.y, y_hit])
        return Trajectory(psi, ys[0], ys[1])
    end = (float(sol.y[0, -1]), float(sol.y[1, -1]))
    raise ShootingEscapeError(
        f"{info.kind} manifold of {info.point} never reached u={target:.6g} "
        f"(c={c:.6g}); stopped at (u, p)={end}", escape_point=end)


def shoot_manifolds(c: float, shock: ShockPosition, model, reaction: ReactionModel,
                    eps_off: float = SEED_OFFSET) -> ShotResult:
    """Integrate both manifolds to the shock lines and record ``p`` there."""
    pot = as_potential(model)
    if not (shock.u_left < pot.alpha and shock.u_right > pot.beta):
        raise ValueError("shock endpoints must satisfy u_l < alpha and u_r > beta")
    top = saddle_directions("u1", c, pot, reaction)
    bottom = saddle_directions("u0", c, pot, reaction)
    # D > 0 near both rest states, so psi runs with z there
    unstable = _shoot_one(top, shock.u_right, c, pot, reaction, eps_off, +1.0)
    stable = _shoot_one(bottom, shock.u_left, c, pot, reaction, eps_off, -1.0)
    return ShotResult(c, float(unstable.p[-1]), float(stable.p[-1]), unstable, stable)


@dataclass
class WaveSpeedSolution:
    c: float
    shock: ShockPosition
    p_at_ur: float
    p_at_ul: float
    unstable: Trajectory
    stable: Trajectory
    weak_residual: float
    scan: list = field(default_factory=list)   # (c, Delta p) samples

    @property
    def mismatch(self) -> float:
        return self.p_at_ur - self.p_at_ul


def weak_solution_residual(c: float, shock: ShockPosition, p_at_ur: float, p_at_ul: float) -> float:
    """``c + (Phi_z(u_r) - Phi_z(u_l)) / (u_r - u_l)`` with ``Phi_z = -p - c u``."""
    phiz_r = -p_at_ur - c * shock.u_right
    phiz_l = -p_at_ul - c * shock.u_left
    return c + (phiz_r - phiz_l) / (shock.u_right - shock.u_left)


def delta_p(c: float, shock: ShockPosition, model, reaction: ReactionModel,
            eps_off: float = SEED_OFFSET) -> float:
    return shoot_manifolds(c, shock, model, reaction, eps_off).mismatch


def solve_wave_speed(shock: ShockPosition, model, reaction: ReactionModel,
                     c_min: float = 0.0, c_max: float = 0.5, n_scan: int = 20,
                     tol: float = SPEED_TOL, eps_off: float = SEED_OFFSET) -> WaveSpeedSolution:
    """Speed at which the two manifolds meet the shock lines at equal ``p``.

    ``Delta p`` is sampled on ``n_scan`` cells of ``[c_min, c_max]``; the
    first sign change is refined.  Monotonicity is never assumed.
    """
    if reaction.family == ZERO:
        raise InadmissibleModelError(
            "zero reaction leaves p constant in the reduced problem; "
            "there is no saddle connection to shoot (simulate instead)")
    pot = as_potential(model)
    scan = []
    prev = None
    bracket = None
    for c in np.linspace(c_min, c_max, n_scan + 1):
        c = float(c)
        try:
            dp = delta_p(c, shock, pot, reaction, eps_off)
        except (ShootingEscapeError, InadmissibleModelError):
            prev = None
            continue
        scan.append((c, dp))
        if dp == 0.0:
            bracket = (c, c)
            break
        if prev is not None and (prev[1] < 0.0) != (dp < 0.0):
            bracket = (prev[0], c)
            break
        prev = (c, dp)
    if bracket is None:
        raise BracketError(f"Delta p does not change sign on [{c_min}, {c_max}]", scan)
    fn = lambda c: delta_p(c, shock, pot, reaction, eps_off)
    c_star = bracket[0] if bracket[0] == bracket[1] else find_root(fn, *bracket, xtol=1e-15)
    shot = shoot_manifolds(c_star, shock, pot, reaction, eps_off)
    if abs(shot.mismatch) > tol:
        raise SolverError(f"|Delta p| = {abs(shot.mismatch):.3e} above {tol:.1e} at c={c_star!r}")
    resid = weak_solution_residual(c_star, shock, shot.p_at_ur, shot.p_at_ul)
    return WaveSpeedSolution(c_star, shock, shot.p_at_ur, shot.p_at_ul,
                             shot.unstable, shot.stable, resid, scan)


# -- layer problem -----------------------------------------------------------

def layer_rhs(u, w, v, model, weight: RegularisationWeight):
    """``(du/dxi, dw/dxi) = (w, (v + Phi(u)) / f(u))``."""
    pot = as_potential(model)
    return w, (v + pot.phi(u)) / weight.f(u)


def layer_eigenvalues(u: float, model, weight: RegularisationWeight) -> np.ndarray:
    """Eigenvalues of the layer Jacobian at the manifold point over ``u``.

    Real ``+-sqrt(D/f)`` where ``D > 0``, purely imaginary where ``D < 0``.
    """
    pot = as_potential(model)
    f = float(weight.f(u))
    # on the manifold v + Phi(u) = 0, so the f' term drops
    J = np.array([[0.0, 1.0], [float(pot.d(u)) / f, 0.0]])
    return np.linalg.eigvals(J)


def layer_hamiltonian(u: float, w: float, v: float, model,
                      weight: RegularisationWeight) -> float:
    """``-w^2/2 + v F(u) + G(u)`` with ``F, G`` integrated from ``u = 0``."""
    pot = as_potential(model)
    F = integrate(lambda s: 1.0 / float(weight.f(s)), 0.0, u, epsabs=1e-15)
    G = integrate(lambda s: float(pot.phi(s)) / float(weight.f(s)), 0.0, u, epsabs=1e-15)
    return -0.5 * w * w + v * F + G


@dataclass
class LayerOrbit:
    xi: np.ndarray
    u: np.ndarray
    w: np.ndarray
    v: float
    hamiltonian: np.ndarray

    @property
    def drift(self) -> float:
        return float(np.max(np.abs(self.hamiltonian - self.hamiltonian[0])))


def layer_orbit(shock: ShockPosition, model, weight: RegularisationWeight,
                eps_off: float = SEED_OFFSET, reach: float = 0.995,
                n_samples: int = 200) -> LayerOrbit:
    """Integrate the layer problem across the shock from near ``(u_l, 0)``.

    Starts on the unstable direction of the saddle at ``u_l`` with
    ``v = -Phi_S`` and stops once ``u`` has covered ``reach`` of the shock
    (or ``w`` turns back to zero).  The Hamiltonian is sampled along the way.
    """
    pot = as_potential(model)
    v = -shock.phi_s
    lam = math.sqrt(float(pot.d(shock.u_left)) / float(weight.f(shock.u_left)))
    y0 = np.array([shock.u_left, 0.0]) + eps_off * np.array([1.0, lam]) / math.hypot(1.0, lam)
    target = shock.u_left + reach * (shock.u_right - shock.u_left)

    def rhs(_, y):
        du, dw = layer_rhs(y[0], y[1], v, pot, weight)
        return [du, float(dw)]

    def arrive(_, y):
        return y[0] - target
    arrive.terminal = True

    def turn(_, y):
        return y[1]
    turn.terminal = True
    turn.direction = -1

    sol = solve_ivp(rhs, (0.0, 1e4), y0, method="DOP853", events=(arrive, turn),
                    rtol=1e-12, atol=1e-15, dense_output=True)
    if sol.status != 1:
        raise SolverError("layer orbit did not cross the shock")
    xi = np.linspace(0.0, sol.t[-1], n_samples)
    u, w = sol.sol(xi)
    H = np.array([layer_hamiltonian(a, b, v, pot, weight) for a, b in zip(u, w)])
    return LayerOrbit(xi, u, w, v, H)
