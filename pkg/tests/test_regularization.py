
import numpy as np
import pytest

from shockselect.errors import BracketError, PositivityError
from shockselect.model import DiffusivityModel, PotentialModel
from shockselect.regularization import (EXPONENTIAL, QUADRATIC, RegularisationWeight,
                                        alt_rule_flux_weighted, alt_rule_fprime_weighted,
                                        check_positive, flux_weighted_jump,
                                        modified_area_closed_form_exponential,
                                        modified_area_integral, shock_for_weight,
                                        solve_weight_parameter)
from shockselect.shock import (area_residual, equal_area_shock, knee_shocks,
                               phi_range, shock_at)

from conftest import random_cubic_models

# mpmath oracle (40 digits) for the delta = 0.5 continuous-D shock
G_ZERO = -0.00038270005899597183
A_EXP = -3.0756619223676957
A_QUAD = 10.645338210992876

_GL_X, _GL_W = np.polynomial.legendre.leggauss(400)


def gauss(fn, lo, hi):
    """Fixed 400-point Gauss-Legendre rule, independent of the adaptive code."""
    x = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(np.sum(_GL_W * fn(x)))


def random_polynomial_models(n, seed):
    """Admissible polynomials (u - alpha)(u - beta) q(u) of degree 2 to 5, q > 0."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        alpha = rng.uniform(0.15, 0.45)
        beta = rng.uniform(alpha + 0.1, 0.75)
        extra = rng.integers(0, 4)
        q = np.r_[1.0, rng.uniform(-0.3, 0.3, extra)]
        coeffs = np.polynomial.polynomial.polymul(
            np.polynomial.polynomial.polyfromroots([alpha, beta]), q)
        try:
            m = DiffusivityModel.polynomial(coeffs)
            knee_shocks(m)
        except ValueError:
            continue
        out.append(m)
    return out


def test_weight_values():
    u = np.linspace(0, 1, 5)
    assert np.all(RegularisationWeight.constant().f(u) == 1.0)
    assert np.allclose(RegularisationWeight.exponential(2.0).f(u), np.exp(-2 * u))
    assert np.allclose(RegularisationWeight.quadratic(3.0).f(u), 1 + 3 * u * u)
    assert np.allclose(RegularisationWeight.exponential(2.0).f_prime(u), -2 * np.exp(-2 * u))


def test_quadratic_positivity():
    with pytest.raises(PositivityError):
        RegularisationWeight.quadratic(-1.0)
    RegularisationWeight.quadratic(-0.999)


def test_constant_weight_reduces_to_equal_area(cubic, cd_shock):
    w = RegularisationWeight.constant()
    plain = area_residual(cubic, cd_shock.u_left, cd_shock.u_right, cd_shock.phi_s)
    assert modified_area_integral(cubic, cd_shock, w) == plain


def test_equal_area_shock_zero_residual(cubic, ea_shock):
    assert abs(modified_area_integral(cubic, ea_shock, RegularisationWeight.constant())) <= 1e-10


def test_cd_shock_fails_plain_rule(cubic, cd_shock):
    assert modified_area_integral(cubic, cd_shock, RegularisationWeight.constant()) == \
        pytest.approx(G_ZERO, abs=1e-12)


def test_custom_weight_checked_on_interval(cubic, cd_shock):
    w = RegularisationWeight.custom(lambda u: u - 0.5, lambda u: np.ones_like(u))
    with pytest.raises(PositivityError):
        modified_area_integral(cubic, cd_shock, w)


def test_closed_form_small_A_limit(cubic, cd_shock):
    plain = modified_area_integral(cubic, cd_shock, RegularisationWeight.constant())
    for A in (1e-4, -1e-4):
        assert abs(modified_area_closed_form_exponential(cubic, cd_shock, A) - plain) <= 1e-6
    assert modified_area_closed_form_exponential(cubic, cd_shock, 0.0) == pytest.approx(plain, abs=1e-15)


def test_closed_form_against_quadrature_random():
    rng = np.random.default_rng(11)
    models = random_polynomial_models(10, seed=5)
    worst = 0.0
    for k in range(50):
        m = models[k % len(models)]
        lo, hi = phi_range(m)
        s = shock_at(m, rng.uniform(lo, hi))
        A = rng.uniform(-20, 20)
        quad_val = modified_area_integral(m, s, RegularisationWeight.exponential(A))
        worst = max(worst, abs(quad_val - modified_area_closed_form_exponential(m, s, A)))
    assert worst <= 1e-10


def test_quadrature_against_gauss_legendre(cubic, cd_shock):
    pot = PotentialModel(cubic)
    for A in (-5.0, -1.0, 2.0, 7.5):
        ref = gauss(lambda u: (pot.phi(u) - cd_shock.phi_s) * np.exp(A * u),
                    cd_shock.u_left, cd_shock.u_right)
        assert modified_area_integral(cubic, cd_shock, RegularisationWeight.exponential(A)) == \
            pytest.approx(ref, abs=1e-13)


def test_solve_exponential(cubic, cd_shock):
    sol = solve_weight_parameter(cubic, cd_shock, EXPONENTIAL)
    assert sol.A == pytest.approx(A_EXP, abs=1e-9)
    assert abs(sol.residual) <= 1e-10
    assert abs(modified_area_closed_form_exponential(cubic, cd_shock, sol.A)) <= 1e-10


def test_solve_quadratic(cubic, cd_shock):
    sol = solve_weight_parameter(cubic, cd_shock, QUADRATIC)
    assert sol.A == pytest.approx(A_QUAD, abs=1e-9)


def test_solve_symmetric_gives_zero(symmetric):
    sol = solve_weight_parameter(symmetric, equal_area_shock(symmetric), EXPONENTIAL)
    assert abs(sol.A) <= 1e-8


def test_single_sign_change_on_bracket(cubic, cd_shock):
    sol = solve_weight_parameter(cubic, cd_shock, EXPONENTIAL)
    lo, hi = sol.bracket
    g = [modified_area_integral(cubic, cd_shock, RegularisationWeight.exponential(a))
         for a in np.linspace(lo, hi, 41)]
    assert np.count_nonzero(np.diff(np.sign(g))) == 1


def test_solve_rejects_knee(cubic):
    lower, _ = knee_shocks(cubic)
    with pytest.raises(ValueError):
        solve_weight_parameter(cubic, lower, EXPONENTIAL)


def test_no_bracket_reports_samples(cubic):
    # a shock hugging the upper knee needs a weight far outside |A| <= 200
    lo, hi = phi_range(cubic)
    s = shock_at(cubic, hi - 1e-12)
    with pytest.raises(BracketError) as info:
        solve_weight_parameter(cubic, s, EXPONENTIAL)
    assert len(info.value.samples) > 5


def test_shock_for_constant_weight(cubic, ea_shock):
    s = shock_for_weight(cubic, RegularisationWeight.constant())
    assert (s.u_left, s.u_right) == (ea_shock.u_left, ea_shock.u_right)


def test_round_trip(cubic, cd_shock):
    A = solve_weight_parameter(cubic, cd_shock, EXPONENTIAL).A
    s = shock_for_weight(cubic, RegularisationWeight.exponential(A))
    assert s.u_left == pytest.approx(cd_shock.u_left, abs=1e-6)
    assert s.u_right == pytest.approx(cd_shock.u_right, abs=1e-6)
    assert s.u_left < cubic.alpha and s.u_right > cubic.beta


@pytest.mark.parametrize("model", random_cubic_models(20, seed=9))
def test_round_trip_random(model):
    from shockselect.shock import continuous_diffusivity_shock
    target = continuous_diffusivity_shock(model)
    for family in (EXPONENTIAL, QUADRATIC):
        try:
            A = solve_weight_parameter(model, target, family).A
        except BracketError as exc:
            # 1 + A u^2 with A > -1 cannot always reach the target; the
            # existence argument only covers the exponential family
            assert family == QUADRATIC
            g = [v for _, v in exc.samples]
            assert all(v > 0 for v in g) or all(v < 0 for v in g)
            continue
        s = shock_for_weight(model, RegularisationWeight(family, A))
        assert abs(s.u_left - target.u_left) <= 1e-6
        assert abs(s.u_right - target.u_right) <= 1e-6
        assert s.u_left < model.alpha and s.u_right > model.beta


def test_flux_weighted_rule_symmetric(symmetric):
    s = equal_area_shock(symmetric)
    assert abs(alt_rule_flux_weighted(symmetric, s, RegularisationWeight.constant())) <= 1e-10


def test_flux_weighted_rule_generic(cubic, cd_shock):
    w = RegularisationWeight.exponential(-2.0)
    assert abs(alt_rule_flux_weighted(cubic, cd_shock, w)) > 1e-6


@pytest.mark.parametrize("A", np.linspace(-3, 3, 20))
def test_flux_weighted_rule_oracle(cubic, cd_shock, A):
    pot = PotentialModel(cubic)
    w = RegularisationWeight.exponential(A)
    ul, ur = cd_shock.u_left, cd_shock.u_right
    psi = lambda u: np.array([gauss(lambda s: pot.d(s) / w.f(s), 0.0, x) for x in np.atleast_1d(u)])
    psi_s = 0.5 * (psi(ul)[0] + psi(ur)[0])
    ref = gauss(lambda u: psi(u) - psi_s, ul, ur)
    assert alt_rule_flux_weighted(cubic, cd_shock, w) == pytest.approx(ref, abs=1e-12)


def test_flux_weighted_jump_constant_weight(cubic, cd_shock):
    # with f = 1 the flux-weighted potential is Phi itself, which is continuous
    assert abs(flux_weighted_jump(cubic, cd_shock, RegularisationWeight.constant())) <= 1e-12


def test_fprime_rule_reduces_to_plain(cubic, ea_shock, cd_shock):
    w = RegularisationWeight.custom(lambda u: u, lambda u: np.ones_like(u), "identity")
    assert abs(alt_rule_fprime_weighted(cubic, ea_shock, w)) <= 1e-10
    plain = area_residual(cubic, cd_shock.u_left, cd_shock.u_right, cd_shock.phi_s)
    assert alt_rule_fprime_weighted(cubic, cd_shock, w) == pytest.approx(plain, abs=1e-14)


def test_fprime_rule_oracle(cubic, cd_shock):
    pot = PotentialModel(cubic)
    w = RegularisationWeight.quadratic(2.0)
    ref = gauss(lambda u: 4.0 * u * (pot.phi(u) - cd_shock.phi_s), cd_shock.u_left, cd_shock.u_right)
    assert alt_rule_fprime_weighted(cubic, cd_shock, w) == pytest.approx(ref, abs=1e-14)


def test_fprime_rule_needs_positive_derivative(cubic, cd_shock):
    with pytest.raises(PositivityError):
        alt_rule_fprime_weighted(cubic, cd_shock, RegularisationWeight.exponential(1.0))


def test_check_positive_flags_zero():
    w = RegularisationWeight.custom(lambda u: u, lambda u: np.ones_like(u))
    with pytest.raises(PositivityError):
        check_positive(w, 0.0, 1.0)
