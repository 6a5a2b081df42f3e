"""2D Navier-Stokes vorticity toolkit for measure-valued initial data."""

from .errors import (CirculationError, ConvergenceError, DegenerateError,
                     DomainError, MarginError, MismatchError, ModeError,
                     Oseen2dError, StabilityError)
from .field import Grid, ScalarField, VectorField, lp_norm, weighted_norm
from .measure import (AtomicDecomposition, FiniteMeasure, atomic_norm,
                      decompose, heat_smooth, total_variation)
from .oseen import OseenVortex, oseen_fields
from .propagators import StepperConfig, Trajectory, fit_decay
from .selfsim import SelfSimilarFrame, semigroup_apply
from .solver import SolverRun, VortexSystem, solve_cauchy

__all__ = [
    "Grid", "ScalarField", "VectorField", "lp_norm", "weighted_norm",
    "FiniteMeasure", "AtomicDecomposition", "total_variation", "atomic_norm",
    "decompose", "heat_smooth",
    "OseenVortex", "oseen_fields",
    "SelfSimilarFrame", "semigroup_apply",
    "StepperConfig", "Trajectory", "fit_decay",
    "VortexSystem", "SolverRun", "solve_cauchy",
    "Oseen2dError", "DomainError", "MarginError", "CirculationError",
    "StabilityError", "DegenerateError", "ModeError", "MismatchError",
    "ConvergenceError",
]

__version__ = "0.1.0"
