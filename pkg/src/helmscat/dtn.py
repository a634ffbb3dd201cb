"""Truncated Dirichlet-to-Neumann operators and boundary-condition rows.

The outgoing-radiation maps act mode by mode: multiplication by i*beta_j
above and i*gamma_j below.  In value space they become dense N x N matrices
via conjugation with the window-shifted DFT matrix G; in coefficient space
only the diagonals are ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chebyshev import cheb_diff_matrix
from .fourier import dft_matrices
from .problem import ModeConstants


@dataclass(frozen=True)
class DtnDiagonals:
    """Diagonals i*beta_j and i*gamma_j over the mode window."""

    lambda_beta: np.ndarray
    lambda_gamma: np.ndarray


@dataclass(frozen=True)
class DtnMatrices:
    """Dense value-space DtN matrices S (top) and T (bottom)."""

    S: np.ndarray
    T: np.ndarray


def dtn_diagonals(modes: ModeConstants) -> DtnDiagonals:
    return DtnDiagonals(1j * modes.betas, 1j * modes.gammas)


def dtn_matrices(modes: ModeConstants) -> DtnMatrices:
    """Dense S = G* diag(i beta) G and T = G* diag(i gamma) G."""
    _, g = dft_matrices(modes.N, modes.q)
    gh = g.conj().T
    return DtnMatrices(
        gh @ (1j * modes.betas[:, None] * g),
        gh @ (1j * modes.gammas[:, None] * g),
    )


def reordered_diagonals(modes: ModeConstants) -> tuple[np.ndarray, np.ndarray]:
    """DtN diagonals permuted into FFT-natural mode order.

    Order is j = 0, 1, ..., N-q, 1-q, ..., -1, i.e. the eigenvalue order in
    which the plain DFT matrix F diagonalizes S and T.
    """
    order = np.concatenate([np.arange(0, modes.N - modes.q + 1), np.arange(1 - modes.q, 0)])
    idx = order + modes.q - 1
    return 1j * modes.betas[idx], 1j * modes.gammas[idx]


def bc_rows_collocation(
    modes: ModeConstants, M: int, dy: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value-space transparent-boundary rows over vec(V), V of shape (M+1, N).

    Top rows enforce d_y v - S v at y = +1 against the incident trace;
    bottom rows enforce d_y v + T v = 0 at y = -1.  Columns of V stack, so
    the blocks are I_N kron (e_0^T D_y) - S kron e_0^T and the mirror form.
    """
    if dy is None:
        dy = cheb_diff_matrix(M)
    N = modes.N
    mats = dtn_matrices(modes)
    top = np.kron(np.eye(N), dy[0:1, :]) - np.kron(mats.S, _unit_row(M, 0))
    bottom = np.kron(np.eye(N), dy[M : M + 1, :]) + np.kron(mats.T, _unit_row(M, M))
    rhs_top = -2j * modes.beta0 * np.exp(-1j * modes.beta0) * np.ones(N, dtype=complex)
    return top, bottom, rhs_top


def _unit_row(M: int, i: int) -> np.ndarray:
    row = np.zeros((1, M + 1))
    row[0, i] = 1.0
    return row


def bc_vectors_tensor(M: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Coefficient-space boundary functionals b1, b2, a1, a2 of length M.

    b1[i] = i^2 and a1[i] = 1 evaluate d_y and the trace at y = +1;
    b2[i] = (-1)^(i+1) i^2 and a2[i] = (-1)^i do the same at y = -1.
    """
    i = np.arange(M, dtype=float)
    b1 = i**2
    b2 = (-1.0) ** (i + 1) * i**2
    a1 = np.ones(M)
    a2 = (-1.0) ** i
    return b1, b2, a1, a2


def bc_rows_tensor(modes: ModeConstants, M: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficient-space transparent-boundary rows over vec(V), V (M, N).

    Row blocks are I_N kron b1^T - Lambda_beta kron a1^T (top) and
    I_N kron b2^T + Lambda_gamma kron a2^T (bottom); the top right-hand side
    is -2i beta0 exp(-i beta0) in the mode-q column only.
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    N = modes.N
    b1, b2, a1, a2 = bc_vectors_tensor(M)
    diags = dtn_diagonals(modes)
    top = np.kron(np.eye(N), b1[None, :]) - np.kron(np.diag(diags.lambda_beta), a1[None, :])
    bottom = np.kron(np.eye(N), b2[None, :]) + np.kron(np.diag(diags.lambda_gamma), a2[None, :])
    rhs_top = np.zeros(N, dtype=complex)
    rhs_top[modes.q - 1] = -2j * modes.beta0 * np.exp(-1j * modes.beta0)
    return top, bottom, rhs_top
