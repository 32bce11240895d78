"""Numerical toolkit for self-similar shrinking curves under curve-shortening flow.

A solution is described by its curvature oscillator: the support function
``tau`` and curvature ``k`` trace closed orbits labelled by an energy
``eta``; the turning angle per period decides whether the planar curve closes.
"""
from .bounds import (BoundReport, bound_report, check_negative_lambda_corollary, lower_bound,
                     published_lower_bound, upper_bound_leading)
from .closed import (ClosedSolution, ThetaProfile, enumerate_closed, find_closed,
                     solve_eta_for_angle, solve_eta_rel_for_angle, theta_profile,
                     validate_theorems)
from .errors import (BelowMinimumError, BracketError, ConservationError, DomainError,
                     IntegrationError, InvariantViolation, NumericalError, ShrinkerError)
from .flow import (PhaseState, PlanarCurve, Trajectory, circle_curve, detect_symmetry_order,
                   equation_residual, find_self_intersection, integrate_period, is_embedded,
                   phase_rhs, reconstruct_curve, symmetry_mismatch, write_curve_csv)
from .potential import (Equilibria, Params, chicone_criterion, energy_slope_at_minimum,
                        equilibria, first_integral, k_plus, min_potential, potential,
                        potential_at, sho_limit_angle)
from .turning_angle import AngleResult, EnergyLevel, delta_theta, delta_theta_rel, energy_level

__version__ = "0.1.0"
