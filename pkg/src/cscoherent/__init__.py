"""Coherent states and geometric phases of Calogero-Sutherland type models."""

__version__ = "0.1.0"

from .classical import (ClassicalTrajectory, explicit_trajectory, monodromy, periodic_envelope,
                        stability)
from .estimators import CoherentStateModel, EnvelopeSolver
from .exceptions import (BranchError, ConfigError, CSError, DomainError, InstabilityError,
                         MarginalStabilityError, QuasiPeriodicityError, ScheduleError, SectorError,
                         TruncationError, UnsupportedClosedForm)
from .integration import QuadratureSpec, inner_product, schrodinger_residual
from .models import ModelSpec, SpectrumLabel, energy_eigenvalue
from .phase import PhaseReport, phase_report
from .schedule import ParameterSchedule
from .wavefunctions import CoherentState, Eigenstate, SymmetricPolynomial

__all__ = [
    "BranchError", "CSError", "ClassicalTrajectory", "CoherentState", "CoherentStateModel",
    "ConfigError", "DomainError", "Eigenstate", "EnvelopeSolver", "InstabilityError",
    "MarginalStabilityError", "ModelSpec", "ParameterSchedule", "PhaseReport", "QuadratureSpec",
    "QuasiPeriodicityError", "ScheduleError", "SectorError", "SpectrumLabel", "SymmetricPolynomial",
    "TruncationError", "UnsupportedClosedForm", "energy_eigenvalue", "explicit_trajectory",
    "inner_product", "monodromy", "periodic_envelope", "phase_report", "schrodinger_residual",
    "stability",
]
