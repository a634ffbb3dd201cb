"""Spectral solvers for 2D quasi-periodic Helmholtz scattering problems.

Two discretizations of the same transparent-boundary problem: a Fourier x
Chebyshev collocation method working in value space, and a tensor-product
Fourier x ultraspherical method working in coefficient space with banded
operators, a fast path for vertically layered media, and layered-medium
preconditioned GMRES for general media.
"""

from .errors import (
    BreakdownError,
    HelmscatError,
    MediumMismatchError,
    RankExceededError,
    ResolutionError,
    ResonanceError,
    SingularSystemError,
    SizeCapError,
    TruncationError,
)
from .problem import (
    Homogeneous,
    IncidentWave,
    Layered,
    MediumSpec,
    ProblemSpec,
    SampledGrid,
    SeparableSum,
    mode_constants,
    validate_medium,
)

__all__ = [
    "IncidentWave",
    "ProblemSpec",
    "MediumSpec",
    "Homogeneous",
    "Layered",
    "SeparableSum",
    "SampledGrid",
    "mode_constants",
    "validate_medium",
    "HelmscatError",
    "ResonanceError",
    "TruncationError",
    "MediumMismatchError",
    "ResolutionError",
    "SingularSystemError",
    "SizeCapError",
    "BreakdownError",
    "RankExceededError",
]
