"""Shock selection for reaction-diffusion equations with negative diffusivity.

The diffusivity ``D(u)`` is positive, negative on ``(alpha, beta)``, then
positive again.  Travelling waves jump across the negative region, and the
jump is fixed by the higher-order regularisation used: the linear one
selects the equal-area shock, the nonlinear one ``-eps^2 (f(u) u_xx)_xx``
selects a weighted equal-area shock, and a suitable ``f`` recovers the
continuous-diffusivity shock.
"""

from .errors import (BracketError, ConfigError, DomainError, InadmissibleModelError,
                     InstabilityError, PoleError, PositivityError, ShockSelectError,
                     ShootingEscapeError, SolverError)
from .model import (DiffusivityModel, PotentialModel, ReactionModel, classify_shape,
                    eval_diffusivity, eval_potential, eval_reaction, find_diffusivity_zeros,
                    oscillatory_example)
from .pde import (SimulationConfig, SimulationResult, discretisation_error_report,
                  estimate_speed, extract_shock, integrate, spatial_rhs)
from .regularization import (RegularisationWeight, alt_rule_flux_weighted,
                             alt_rule_fprime_weighted, modified_area_closed_form_exponential,
                             modified_area_integral, shock_for_weight, solve_weight_parameter)
from .shock import (ShockFamily, ShockPosition, continuous_diffusivity_shock,
                    continuous_diffusivity_shocks, endpoints_for_phi, equal_area_shock,
                    knee_shocks, shock_length, shock_length_derivative, shock_length_extrema)
from .wave import (PhasePoint, WaveSpeedSolution, desingularised_rhs, layer_hamiltonian,
                   layer_rhs, saddle_directions, shoot_manifolds, solve_wave_speed)

__version__ = "0.1.0"

__all__ = ["BracketError", "ConfigError", "DiffusivityModel", "DomainError",
           "InadmissibleModelError", "InstabilityError", "PhasePoint", "PoleError",
           "PositivityError", "PotentialModel", "ReactionModel",
           "RegularisationWeight", "ShockFamily", "ShockPosition", "ShockSelectError",
           "ShootingEscapeError", "SimulationConfig", "SimulationResult",
           "SolverError", "WaveSpeedSolution", "alt_rule_flux_weighted",
           "alt_rule_fprime_weighted", "classify_shape",
           "continuous_diffusivity_shock", "continuous_diffusivity_shocks",
           "desingularised_rhs", "discretisation_error_report", "endpoints_for_phi",
           "equal_area_shock", "estimate_speed", "eval_diffusivity", "eval_potential",
           "eval_reaction", "extract_shock", "find_diffusivity_zeros", "integrate",
           "knee_shocks", "layer_hamiltonian", "layer_rhs",
           "modified_area_closed_form_exponential", "modified_area_integral",
           "oscillatory_example", "saddle_directions", "shock_for_weight",
           "shock_length", "shock_length_derivative", "shock_length_extrema",
           "shoot_manifolds", "solve_wave_speed", "solve_weight_parameter",
           "spatial_rhs", "__version__"]
