"""
Constructores covariantes de observables de localización y sus verificaciones.
"""

from .checks import (
    AbsoluteContinuityResult,
    CovarianceSweep,
    ResolutionSweep,
    absolute_continuity_constant,
    covariance_check,
    covariance_sweep,
    resolution_sweep,
)
from .coherent import CoherentGrid, build_coherent_povm, displaced_fiducials, displacement_element
from .fiducials import FiducialVector, build_fiducial, fiducial_from_amplitudes
from .weyl import WeylSystem, build_wh_povm

__all__ = [
    "AbsoluteContinuityResult",
    "CoherentGrid",
    "CovarianceSweep",
    "FiducialVector",
    "ResolutionSweep",
    "WeylSystem",
    "absolute_continuity_constant",
    "build_coherent_povm",
    "build_fiducial",
    "build_wh_povm",
    "covariance_check",
    "covariance_sweep",
    "displaced_fiducials",
    "displacement_element",
    "fiducial_from_amplitudes",
    "resolution_sweep",
]
