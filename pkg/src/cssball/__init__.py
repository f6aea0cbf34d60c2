"""Concentrated radial states of a gauged Schroedinger energy on a disk.

The package moves from closed-form line solitons through the scalar
frequency equation, the second variation at its roots, and the discrete
disk energy with its nonlocal charge coupling, up to a full minimizer
that concentrates near the boundary.  cli exposes every stage as a
subcommand with bit-exact delimited output.
"""

from .driver import (AnsatzSpec, ScanResult, SolveReport,
                     SweepCell, boundary_cutoff, build_ansatz,
                     default_exponents, grid_for, reduced_model, reduced_scan,
                     scan_window, solve, sweep, tangent_direction)
from .limit import (LimitRoots, Thresholds, concentration_roots,
                    critical_frequency, limit_energy, limit_energy_closed,
                    locate_energy_sign_change, root_function, thresholds)
from .linearized import (CoercivityReport, LineGrid, SecondVariation,
                         coercivity_constant, degenerate_direction, line_grid,
                         low_spectrum, second_variation, translation_mode,
                         translation_residual)
from .radial import (EnergyReport, Grid, RadialField, energy,
                     equation_residual, gradient, gradient_norm,
                     hessian_apply, weighted_norm)
from .soliton import (Params, QuadratureError, SolitonConstants, decay_rate,
                      scaled_soliton, scaled_soliton_prime, soliton_constants,
                      soliton_integrals, tail_amplitude, truncation_length,
                      unit_soliton, unit_soliton_prime)

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec", "CoercivityReport", "EnergyReport",
    "Grid", "LimitRoots", "LineGrid", "Params", "QuadratureError",
    "RadialField", "ScanResult", "SecondVariation", "SolitonConstants",
    "SolveReport", "SweepCell", "Thresholds", "boundary_cutoff",
    "build_ansatz", "coercivity_constant", "concentration_roots",
    "critical_frequency", "decay_rate", "default_exponents",
    "degenerate_direction", "energy", "equation_residual", "gradient",
    "gradient_norm", "grid_for", "hessian_apply", "limit_energy",
    "limit_energy_closed", "line_grid", "locate_energy_sign_change",
    "low_spectrum", "reduced_model", "reduced_scan", "root_function",
    "scaled_soliton", "scaled_soliton_prime", "scan_window",
    "second_variation", "solve", "soliton_constants", "soliton_integrals",
    "sweep", "tail_amplitude", "tangent_direction", "thresholds",
    "translation_mode", "translation_residual", "truncation_length",
    "unit_soliton", "unit_soliton_prime", "weighted_norm",
]
