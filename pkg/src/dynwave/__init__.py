"""Energy-conserving finite difference schemes for 1-D nonlinear wave
equations with dynamic boundary conditions."""

from .general import GeneralProblem, general_energy, general_residual, general_step
from .harness import ExperimentConfig, convergence_study, energy_drift, preset, run
from .mesh import Grid, StatePair, as_field
from .quotients import Nonlinearity, flux_density, nonlinearity
from .semilinear import (
    NoConvergence,
    SolverParams,
    StepDiagnostics,
    discrete_energy,
    first_step,
    scheme_residual,
    step,
)

__all__ = [
    "ExperimentConfig",
    "GeneralProblem",
    "Grid",
    "NoConvergence",
    "Nonlinearity",
    "SolverParams",
    "StatePair",
    "StepDiagnostics",
    "as_field",
    "convergence_study",
    "discrete_energy",
    "energy_drift",
    "first_step",
    "flux_density",
    "general_energy",
    "general_residual",
    "general_step",
    "nonlinearity",
    "preset",
    "run",
    "scheme_residual",
    "step",
]

__version__ = "0.1.0"
