"""Post-processing: Rayleigh coefficients, energy balance, field evaluation.

Matching the solution traces at y = +-1 to the outgoing plane-wave
expansions gives the reflection and transmission coefficients
r_j = (v_j(1) - delta_j0 e^(-i beta0)) e^(-i beta_j) and
t_j = v_j(-1) e^(-i gamma_j).  For real media the propagating-mode flux
balance (sum beta_j |r_j|^2 + sum gamma_j |t_j|^2) / beta0 = 1 is the main
correctness oracle, since no closed-form solution exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .chebyshev import barycentric_interp
from .field import SolutionField
from .fourier import grid_to_modes
from .problem import ModeConstants, ProblemSpec, medium_is_real

# |exp(i beta_j)| = exp(-Im beta_j) underflows the extraction for strongly
# evanescent modes; report those coefficients as zero instead of amplifying
# trace noise by exp(+Im beta_j)
EVANESCENT_GUARD = 30.0


@dataclass(frozen=True)
class DiagnosticsReport:
    r: dict[int, complex]
    t: dict[int, complex]
    energy: float | None
    energy_defect: float | None
    propagating_up: tuple[int, ...]
    propagating_down: tuple[int, ...]
    method: str
    N: int
    M: int
    q: int
    guarded_r: tuple[int, ...] = ()
    guarded_t: tuple[int, ...] = ()
    krylov_residuals: tuple[float, ...] | None = None

    @property
    def krylov_iterations(self) -> int | None:
        if self.krylov_residuals is None:
            return None
        return max(len(self.krylov_residuals) - 1, 0)

    def to_json_dict(self) -> dict:
        def cmap(d):
            return {str(j): [v.real, v.imag] for j, v in sorted(d.items())}

        out = {
            "method": self.method,
            "N": self.N,
            "M": self.M,
            "q": self.q,
            "r": cmap(self.r),
            "t": cmap(self.t),
            "energy": self.energy,
            "energy_defect": self.energy_defect,
            "propagating_up": list(self.propagating_up),
            "propagating_down": list(self.propagating_down),
            "guarded_r": list(self.guarded_r),
            "guarded_t": list(self.guarded_t),
        }
        if self.krylov_residuals is not None:
            out["gmres_iterations"] = self.krylov_iterations
            out["gmres_final_residual"] = self.krylov_residuals[-1]
        return out


def boundary_mode_traces(solution: SolutionField) -> tuple[np.ndarray, np.ndarray]:
    """Windowed Fourier coefficients of v at y = +1 and y = -1."""
    modes = solution.modes
    if solution.space == "value":
        top = grid_to_modes(solution.data[0], modes.q)
        bottom = grid_to_modes(solution.data[-1], modes.q)
    else:
        i = np.arange(solution.data.shape[0])
        top = np.ones_like(i, dtype=complex) @ solution.data
        bottom = ((-1.0) ** i).astype(complex) @ solution.data
    return top, bottom


def rayleigh_coefficients(
    solution: SolutionField, modes: ModeConstants | None = None
) -> tuple[dict[int, complex], dict[int, complex]]:
    """Reflection and transmission coefficients over the mode window."""
    if modes is None:
        modes = solution.modes
    top, bottom = boundary_mode_traces(solution)
    r: dict[int, complex] = {}
    t: dict[int, complex] = {}
    for k, j in enumerate(modes.js):
        beta, gamma = modes.betas[k], modes.gammas[k]
        trace = top[k] - (np.exp(-1j * modes.beta0) if j == 0 else 0.0)
        r[int(j)] = 0.0 if beta.imag > EVANESCENT_GUARD else complex(trace * np.exp(-1j * beta))
        t[int(j)] = (
            0.0 if gamma.imag > EVANESCENT_GUARD else complex(bottom[k] * np.exp(-1j * gamma))
        )
    return r, t


def guarded_modes(modes: ModeConstants) -> tuple[tuple[int, ...], tuple[int, ...]]:
    gr = tuple(int(j) for k, j in enumerate(modes.js) if modes.betas[k].imag > EVANESCENT_GUARD)
    gt = tuple(int(j) for k, j in enumerate(modes.js) if modes.gammas[k].imag > EVANESCENT_GUARD)
    return gr, gt


def energy_balance(r: dict[int, complex], t: dict[int, complex], modes: ModeConstants) -> float:
    """Propagating-mode flux ratio; equals 1 for lossless real media."""
    up = sum(
        modes.betas[modes.index_of(j)].real * abs(r[j]) ** 2 for j in modes.propagating_up
    )
    down = sum(
        modes.gammas[modes.index_of(j)].real * abs(t[j]) ** 2 for j in modes.propagating_down
    )
    return float((up + down) / modes.beta0.real)


def evaluate_field(
    solution: SolutionField,
    xs: np.ndarray,
    ys: np.ndarray,
    reconstruct_u: bool = True,
) -> np.ndarray:
    """Evaluate the solution on the tensor grid ys x xs.

    Value-space data is interpolated trigonometrically in x and
    barycentrically in y; coefficient-space data is summed directly.  With
    reconstruct_u the quasi-periodic factor exp(i alpha0 x) is restored.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    modes = solution.modes
    if solution.space == "value":
        mode_rows = grid_to_modes(solution.data, modes.q, axis=1)
        at_ys = barycentric_interp(mode_rows, ys)
    else:
        vander = npcheb.chebvander(ys, solution.data.shape[0] - 1)
        at_ys = vander @ solution.data
    phases = np.exp(1j * np.outer(modes.js, xs))
    out = at_ys @ phases
    if reconstruct_u:
        out = out * np.exp(1j * modes.alpha0 * xs)[None, :]
    return out


def compare_methods(
    sol_a: SolutionField, sol_b: SolutionField, xs: np.ndarray, ys: np.ndarray
) -> float:
    """Max-norm difference of the reconstructed u fields on a common grid."""
    ua = evaluate_field(sol_a, xs, ys, reconstruct_u=True)
    ub = evaluate_field(sol_b, xs, ys, reconstruct_u=True)
    return float(np.abs(ua - ub).max())


def make_report(
    problem: ProblemSpec,
    solution: SolutionField,
    method: str,
    krylov_residuals=None,
) -> DiagnosticsReport:
    """Full post-processing bundle for one solve."""
    modes = solution.modes
    r, t = rayleigh_coefficients(solution)
    if medium_is_real(problem.medium) and problem.wave.eps_plus.imag == 0 and problem.wave.eps_minus.imag == 0:
        energy = energy_balance(r, t, modes)
        defect = abs(energy - 1.0)
    else:
        energy = None
        defect = None
    gr, gt = guarded_modes(modes)
    if solution.space == "value":
        m_param = solution.grid_M
    else:
        m_param = solution.coeff_count
    return DiagnosticsReport(
        r=r,
        t=t,
        energy=energy,
        energy_defect=defect,
        propagating_up=modes.propagating_up,
        propagating_down=modes.propagating_down,
        method=method,
        N=modes.N,
        M=m_param,
        q=modes.q,
        guarded_r=gr,
        guarded_t=gt,
        krylov_residuals=tuple(krylov_residuals) if krylov_residuals is not None else None,
    )
