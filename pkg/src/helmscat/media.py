"""Built-in media and wave presets for the benchmark scattering problems.

All permittivity profiles decay to 1 at y = +-1 through the C-infinity bump
factor exp(3/(y^2-1) + 4), whose removable endpoint limit is evaluated as
zero so grid sampling at y = +-1 is exact.
"""

from __future__ import annotations

import numpy as np

from .problem import Homogeneous, IncidentWave, Layered, MediumSpec, ProblemSpec, SeparableSum

PRESET_NAMES = ("homogeneous", "eps1", "eps2", "eps3")


def paper_wave() -> IncidentWave:
    """theta = 3*pi/7, omega = 10, eps+- = mu = 1."""
    return IncidentWave(omega=10.0, theta=3.0 * np.pi / 7.0)


def bump_profile(y) -> np.ndarray:
    """exp(3/(y^2-1) + 4) on (-1, 1), extended by its limit 0 at y = +-1."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        expo = np.where(np.abs(y) < 1.0, 3.0 / (y * y - 1.0), -np.inf)
    return np.exp(expo + 4.0) + 0j


def eps1_profile(y) -> np.ndarray:
    return 1.0 + bump_profile(y)


def _x_factor(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.cos(np.pi * np.sin(x / 2.0))


def eps2_bivariate(x, y) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return 1.0 + bump_profile(y) * np.exp(-_x_factor(x))


def eps3_bivariate(x, y) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return 1.0 + np.where(
        np.abs(y) < 1.0, bump_profile(y) * np.exp(-y * _x_factor(x)), 0.0
    )


class Bivariate(MediumSpec):
    """Permittivity given by an arbitrary callable eps(x, y)."""

    def __init__(self, fn):
        self.fn = fn

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.asarray(self.fn(x, y), dtype=complex)


def _ones_x(x):
    return np.ones_like(np.asarray(x, dtype=float)) + 0j


def _ones_y(y):
    return np.ones_like(np.asarray(y, dtype=float)) + 0j


def registry_medium(name: str) -> MediumSpec:
    """Built-in media by name; eps2 ships in its exact rank-2 separable form."""
    if name == "homogeneous":
        return Homogeneous(1.0)
    if name == "eps1":
        return Layered(eps1_profile)
    if name == "eps2":
        return SeparableSum(
            (
                (_ones_x, _ones_y),
                (lambda x: np.exp(-_x_factor(x)) + 0j, bump_profile),
            )
        )
    if name == "eps3":
        return Bivariate(eps3_bivariate)
    raise KeyError(f"unknown medium {name!r}; choose one of {PRESET_NAMES}")


def preset_problem(name: str) -> ProblemSpec:
    return ProblemSpec(paper_wave(), registry_medium(name))
