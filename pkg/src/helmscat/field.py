"""Solution container shared by the collocation and tensor solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chebyshev import coeffs_to_values, vals_to_coeffs
from .fourier import grid_to_modes, modes_to_grid
from .problem import ModeConstants

VALUE = "value"
COEFF = "coeff"


@dataclass(frozen=True)
class SolutionField:
    """Periodic-part solution v in value or coefficient space.

    Value space holds samples v(x_n, y_m) as an (M+1, N) array (rows run
    down the Chebyshev grid, columns across the periodic grid).  Coefficient
    space holds an (M, N) array of Chebyshev (rows, degrees 0..M-1) by
    Fourier (columns, modes 1-q..N-q) coefficients.
    """

    data: np.ndarray
    space: str
    modes: ModeConstants

    def __post_init__(self):
        object.__setattr__(self, "data", np.asarray(self.data, dtype=complex))
        if self.space not in (VALUE, COEFF):
            raise ValueError("space must be 'value' or 'coeff'")
        if self.data.ndim != 2 or self.data.shape[1] != self.modes.N:
            raise ValueError("data shape inconsistent with mode window")

    @property
    def n_modes(self) -> int:
        return self.modes.N

    @property
    def grid_M(self) -> int:
        """Chebyshev grid parameter (value space only)."""
        if self.space != VALUE:
            raise ValueError("grid_M is defined for value-space fields")
        return self.data.shape[0] - 1

    @property
    def coeff_count(self) -> int:
        """Number of Chebyshev coefficient rows (coefficient space only)."""
        if self.space != COEFF:
            raise ValueError("coeff_count is defined for coefficient-space fields")
        return self.data.shape[0]

    def to_coeff_space(self) -> "SolutionField":
        if self.space == COEFF:
            return self
        coeffs = vals_to_coeffs(grid_to_modes(self.data, self.modes.q, axis=1), axis=0)
        return SolutionField(coeffs, COEFF, self.modes)

    def to_value_space(self, grid_M: int | None = None) -> "SolutionField":
        if self.space == VALUE and (grid_M is None or grid_M == self.grid_M):
            return self
        coeffs = self.to_coeff_space().data
        if grid_M is None:
            grid_M = max(coeffs.shape[0] - 1, 1)
        padded = np.zeros((grid_M + 1, self.modes.N), dtype=complex)
        rows = min(grid_M + 1, coeffs.shape[0])
        padded[:rows] = coeffs[:rows]
        values = modes_to_grid(coeffs_to_values(padded, axis=0), self.modes.q, axis=1)
        return SolutionField(values, VALUE, self.modes)
