"""Fourier x Chebyshev spectral collocation solver.

Assembles the dense global system [top BC rows; interior Helmholtz rows;
bottom BC rows] over vec(V) with V the (M+1) x N value grid (columns
stacked), and solves it by LU.  For vertically layered media the DFT
decouples the system into N one-dimensional problems of which only the
incident-mode one has a nonzero right-hand side, so a single (M+1) solve
suffices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chebyshev import cheb_diff_matrix, cheb_points, downsampling_matrix
from .dtn import bc_rows_collocation
from .errors import SingularSystemError
from .field import SolutionField
from .fourier import fourier_diff_matrices, fourier_grid
from .problem import ModeConstants, ProblemSpec, mode_constants


@dataclass(frozen=True)
class CollocationSystem:
    """Dense collocation system A v = g with layout metadata.

    Rows are ordered [N top BC rows; N(M-1) interior rows; N bottom BC
    rows]; v stacks the columns of the (M+1) x N value grid.
    """

    A: np.ndarray
    g: np.ndarray
    modes: ModeConstants
    M: int


def assemble_collocation(
    problem: ProblemSpec,
    N: int,
    M: int,
    q: int | None = None,
    check_truncation: bool = True,
) -> CollocationSystem:
    """Assemble the global collocation system for any medium."""
    modes = mode_constants(problem.wave, N, q, check_truncation)
    wave = problem.wave
    xs = fourier_grid(N)
    ys = cheb_points(M)
    xg, yg = np.meshgrid(xs, ys)
    eps = problem.medium.evaluate(xg, yg)

    dx, dxx = fourier_diff_matrices(N)
    dy = cheb_diff_matrix(M)
    p = downsampling_matrix(M)
    pdy2 = p @ (dy @ dy)
    alpha0 = modes.alpha0
    bx = dxx + 2j * alpha0 * dx - abs(alpha0) ** 2 * np.eye(N)

    h = np.kron(bx, p).astype(complex)
    h += np.kron(np.eye(N), pdy2)
    w2mu = wave.omega**2 * wave.mu
    for n in range(N):
        cols = slice(n * (M + 1), (n + 1) * (M + 1))
        h[n * (M - 1) : (n + 1) * (M - 1), cols] += w2mu * (p * eps[:, n][None, :])

    top, bottom, rhs_top = bc_rows_collocation(modes, M, dy)
    a = np.vstack([top, h, bottom])
    g = np.zeros(N * (M + 1), dtype=complex)
    g[:N] = rhs_top
    return CollocationSystem(a, g, modes, M)


def solve_collocation(system: CollocationSystem) -> SolutionField:
    """Direct dense solve of the assembled system."""
    try:
        v = np.linalg.solve(system.A, system.g)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    N, M = system.modes.N, system.M
    values = v.reshape(N, M + 1).T
    return SolutionField(values, "value", system.modes)


def layered_mode_matrix(
    profile_values: np.ndarray,
    wave_omega_mu: complex,
    alpha_sq: complex,
    lam_beta: complex,
    lam_gamma: complex,
    dy: np.ndarray,
) -> np.ndarray:
    """One decoupled (M+1) x (M+1) mode system for a layered medium.

    Rows: [e_0^T D_y - lam_beta e_0^T; P (D_y^2 + w^2 mu eps(y)) - alpha^2 P;
    e_M^T D_y + lam_gamma e_M^T].
    """
    M = dy.shape[0] - 1
    interior = dy @ dy + np.diag(wave_omega_mu * profile_values) - alpha_sq * np.eye(M + 1)
    a = np.zeros((M + 1, M + 1), dtype=complex)
    a[0] = dy[0]
    a[0, 0] -= lam_beta
    a[1:M] = interior[1:M]
    a[M] = dy[M]
    a[M, M] += lam_gamma
    return a


def solve_layered_collocation(
    problem: ProblemSpec,
    N: int,
    M: int,
    q: int | None = None,
    check_truncation: bool = True,
) -> SolutionField:
    """Fast path for layered media: one (M+1) solve, columns all equal.

    After the DFT in x, every transformed column except the incident-mode
    one satisfies a homogeneous well-posed system and therefore vanishes.
    """
    if not problem.medium.is_layered:
        raise ValueError("layered fast path requires a layered medium")
    modes = mode_constants(problem.wave, N, q, check_truncation)
    wave = problem.wave
    ys = cheb_points(M)
    eps_y = problem.medium.evaluate(np.zeros_like(ys), ys)
    dy = cheb_diff_matrix(M)
    a = layered_mode_matrix(
        eps_y,
        wave.omega**2 * wave.mu,
        abs(modes.alpha0) ** 2,
        1j * modes.beta0,
        1j * modes.gamma0,
        dy,
    )
    rhs = np.zeros(M + 1, dtype=complex)
    rhs[0] = -2j * modes.beta0 * np.exp(-1j * modes.beta0)
    try:
        column = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    values = np.tile(column[:, None], (1, N))
    return SolutionField(values, "value", modes)
