"""Quasi-potential of the viscous Burgers equation with Dirichlet data."""

__version__ = "0.1.0"

from .energy import (EnergyReport, ReferenceStep, energy_G_ell, energy_G_infinity,
                     energy_interval, entropy, eval_g, excess_energy_closed_form,
                     homogeneous_quasipotential, minimum_energy_whole_line)
from .grid import GridFunction, PhiPath
from .profiles import (BoundaryData, FiniteInterval, GluedRecovery, HalfLineMinus,
                       HalfLinePlus, InfeasibleError, StationaryProfile, WholeLine,
                       boundary_from_alpha, make_boundary, recovery_profile, sample,
                       solve_current, stationary_profile)
from .varmin import (MinimizationResult, minimize_phi_collocation, minimize_phi_dp,
                     reduced_F)

__all__ = [
    "BoundaryData", "EnergyReport", "FiniteInterval", "GluedRecovery", "GridFunction",
    "HalfLineMinus", "HalfLinePlus", "InfeasibleError", "MinimizationResult", "PhiPath",
    "ReferenceStep", "StationaryProfile", "WholeLine", "boundary_from_alpha", "energy_G_ell",
    "energy_G_infinity", "energy_interval", "entropy", "eval_g", "excess_energy_closed_form",
    "homogeneous_quasipotential", "make_boundary", "minimize_phi_collocation", "minimize_phi_dp",
    "minimum_energy_whole_line", "recovery_profile", "reduced_F", "sample", "solve_current",
    "stationary_profile",
]
