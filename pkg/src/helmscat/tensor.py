"""Tensor-product Fourier x ultraspherical solver.

Unknowns are Chebyshev-by-Fourier coefficients V (M rows, N mode columns).
The interior operator is X kron (QC) + I kron (QY) + w^2 mu sum_k
Phi_k kron (Q Psi_k) with X the diagonal horizontal symbol, C the double
conversion, Y the second-derivative operator and (Phi_k, Psi_k) banded
multiplication operators of a separable permittivity term; rows are ordered
[top BC; bottom BC; interior].  Layered media decouple into independent
almost-banded mode systems, which also serve as the preconditioner for
general media under GMRES.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .banded import BandedOperator
from .chebyshev import ChebCoeffs, cheb_resolve
from .dtn import bc_vectors_tensor
from .errors import NotConvergedError, SingularSystemError, SizeCapError
from .field import SolutionField
from .fourier import TrigCoeffs, toeplitz_mult, trig_resolve
from .krylov import GmresResult, KrylovLog, gmres
from .problem import ModeConstants, ProblemSpec, mode_constants
from .ultraspherical import (
    AlmostBandedFactor,
    conversion_operator,
    diff_operator,
    mult_operator_cheb,
)

# dense LU on the materialized system is the default below this many
# unknowns; measured at ~10 s near the cap on one core, so larger systems
# go through preconditioned GMRES instead
DENSE_CAP_DEFAULT = 6000


@dataclass(frozen=True)
class TensorSystem:
    """Assembled coefficient-space system with structured parts only.

    ``terms`` pairs the mode-window Toeplitz section Phi_k with the
    converted Chebyshev multiplication section Psi_k for each separable
    permittivity term; the dense matrix is only ever materialized on
    request.
    """

    modes: ModeConstants
    M: int
    w2mu: complex
    x_diag: np.ndarray
    conv: BandedOperator
    d2: BandedOperator
    terms: tuple[tuple[BandedOperator, BandedOperator], ...]
    psi_coeffs: tuple[ChebCoeffs, ...]
    phi_means: tuple[complex, ...]
    rhs: np.ndarray

    @property
    def n_unknowns(self) -> int:
        return self.M * self.modes.N


def converted_mult_operator(psi: ChebCoeffs, M: int) -> BandedOperator:
    """Exact M x M section of S_1 S_0 M_0[psi]."""
    pad = M + psi.degree + 6
    op = conversion_operator(1, pad) @ (conversion_operator(0, pad) @ mult_operator_cheb(psi, pad))
    return op.truncate(M)


def double_conversion(M: int) -> BandedOperator:
    """Exact M x M section of S_1 S_0."""
    pad = M + 6
    return (conversion_operator(1, pad) @ conversion_operator(0, pad)).truncate(M)


def assemble_tensor(
    problem: ProblemSpec,
    M: int,
    N: int,
    q: int | None = None,
    resolve_tol: float = 1e-12,
    check_truncation: bool = True,
) -> TensorSystem:
    """Resolve the medium into separable terms and build the system parts."""
    modes = mode_constants(problem.wave, N, q, check_truncation)
    wave = problem.wave
    alpha0 = modes.alpha0
    js = modes.js.astype(complex)
    x_diag = -(js**2) - 2.0 * alpha0 * js - abs(alpha0) ** 2

    terms = []
    psi_list = []
    phi_means = []
    for phi, psi in problem.medium.separable_terms():
        tphi = phi if isinstance(phi, TrigCoeffs) else trig_resolve(phi, resolve_tol)
        cpsi = psi if isinstance(psi, ChebCoeffs) else cheb_resolve(psi, resolve_tol)
        terms.append((toeplitz_mult(tphi, N, modes.q), converted_mult_operator(cpsi, M)))
        psi_list.append(cpsi)
        phi_means.append(tphi.coeff(0))

    b1, b2, a1, a2 = bc_vectors_tensor(M)
    rhs = np.zeros(M * N, dtype=complex)
    rhs[modes.q - 1] = -2j * modes.beta0 * np.exp(-1j * modes.beta0)
    return TensorSystem(
        modes=modes,
        M=M,
        w2mu=wave.omega**2 * wave.mu,
        x_diag=x_diag,
        conv=double_conversion(M),
        d2=diff_operator(2, M),
        terms=tuple(terms),
        psi_coeffs=tuple(psi_list),
        phi_means=tuple(phi_means),
        rhs=rhs,
    )


def apply_operator(system: TensorSystem, v: np.ndarray) -> np.ndarray:
    """Matrix-free action of the assembled system on vec(V)."""
    M, N = system.M, system.modes.N
    V = np.asarray(v, dtype=complex).reshape(N, M).T
    interior = (system.conv @ V)[: M - 2] * system.x_diag[None, :]
    interior += (system.d2 @ V)[: M - 2]
    for phi, psi in system.terms:
        interior += system.w2mu * (phi @ (psi @ V)[: M - 2].T).T
    b1, b2, a1, a2 = bc_vectors_tensor(M)
    lam_beta = 1j * system.modes.betas
    lam_gamma = 1j * system.modes.gammas
    top = b1 @ V - lam_beta * (a1 @ V)
    bottom = b2 @ V + lam_gamma * (a2 @ V)
    return np.concatenate([top, bottom, interior.T.reshape(-1)])


def materialize(system: TensorSystem) -> np.ndarray:
    """Dense matrix of the assembled system (row order [top; bottom; interior])."""
    M, N = system.M, system.modes.N
    size = M * N
    a = np.zeros((size, size), dtype=complex)
    b1, b2, a1, a2 = bc_vectors_tensor(M)
    lam_beta = 1j * system.modes.betas
    lam_gamma = 1j * system.modes.gammas
    a[:N] = np.kron(np.eye(N), b1[None, :]) - np.kron(np.diag(lam_beta), a1[None, :])
    a[N : 2 * N] = np.kron(np.eye(N), b2[None, :]) + np.kron(np.diag(lam_gamma), a2[None, :])
    qc = system.conv.toarray()[: M - 2]
    qy = system.d2.toarray()[: M - 2]
    for n in range(N):
        rows = slice(2 * N + n * (M - 2), 2 * N + (n + 1) * (M - 2))
        a[rows, n * M : (n + 1) * M] = system.x_diag[n] * qc + qy
    for phi, psi in system.terms:
        qpsi = system.w2mu * psi.toarray()[: M - 2]
        for off, d in phi.diags.items():
            for n in range(max(0, -off), min(N, N - off)):
                if d[n] == 0.0:
                    continue
                rows = slice(2 * N + n * (M - 2), 2 * N + (n + 1) * (M - 2))
                cols = slice((n + off) * M, (n + off + 1) * M)
                a[rows, cols] += d[n] * qpsi
    return a


def solve_tensor_dense(system: TensorSystem, cap: int = DENSE_CAP_DEFAULT) -> SolutionField:
    """Materialize and LU-solve; refuses systems above the unknown cap."""
    if system.n_unknowns > cap:
        raise SizeCapError(f"{system.n_unknowns} unknowns exceed the dense cap {cap}")
    a = materialize(system)
    try:
        v = np.linalg.solve(a, system.rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    coeffs = v.reshape(system.modes.N, system.M).T
    return SolutionField(coeffs, "coeff", system.modes)


# ---------------------------------------------------------------------------
# layered mode systems (fast path and preconditioner)


def layered_mode_factor(
    modes: ModeConstants,
    M: int,
    psi: ChebCoeffs,
    w2mu: complex,
    columns: np.ndarray | None = None,
) -> AlmostBandedFactor:
    """Batched factorization of the decoupled mode systems of a layered medium.

    Mode column n solves [b1 - i beta a1; b2 + i gamma a2;
    Q(Y + w2mu Psi + X_nn C)] with the shared banded parts built once.
    """
    if columns is None:
        columns = np.arange(modes.N)
    columns = np.asarray(columns, dtype=int)
    B = columns.size
    js = modes.js.astype(complex)[columns]
    alpha0 = modes.alpha0
    x_diag = -(js**2) - 2.0 * alpha0 * js - abs(alpha0) ** 2

    conv = double_conversion(M)
    d2 = diff_operator(2, M)
    psi_op = converted_mult_operator(psi, M)
    base = d2 + w2mu * psi_op
    offsets = sorted(set(base.diags) | set(conv.diags))
    body_diags = {}
    for off in offsets:
        col = np.zeros((M, B), dtype=complex)
        if off in base.diags:
            col += base.diags[off][:, None]
        if off in conv.diags:
            col += conv.diags[off][:, None] * x_diag[None, :]
        body_diags[off] = col

    b1, b2, a1, a2 = bc_vectors_tensor(M)
    dense = np.zeros((2, M, B), dtype=complex)
    dense[0] = b1[:, None] - (1j * modes.betas[columns])[None, :] * a1[:, None]
    dense[1] = b2[:, None] + (1j * modes.gammas[columns])[None, :] * a2[:, None]
    return AlmostBandedFactor(dense, body_diags, M)


def solve_layered_tensor(
    problem: ProblemSpec,
    M: int,
    N: int,
    q: int | None = None,
    resolve_tol: float = 1e-12,
    check_truncation: bool = True,
) -> SolutionField:
    """Fast path for layered media: one almost-banded solve, mode q only."""
    if not problem.medium.is_layered:
        raise ValueError("layered fast path requires a layered medium")
    modes = mode_constants(problem.wave, N, q, check_truncation)
    wave = problem.wave
    (_, profile), = problem.medium.separable_terms()
    psi = profile if isinstance(profile, ChebCoeffs) else cheb_resolve(profile, resolve_tol)
    w2mu = wave.omega**2 * wave.mu
    factor = layered_mode_factor(modes, M, psi, w2mu, columns=np.array([modes.q - 1]))
    rhs = np.zeros(M, dtype=complex)
    rhs[0] = -2j * modes.beta0 * np.exp(-1j * modes.beta0)
    column = factor.solve(rhs[:, None])[:, 0]
    coeffs = np.zeros((M, N), dtype=complex)
    coeffs[:, modes.q - 1] = column
    return SolutionField(coeffs, "coeff", modes)


class LayeredPreconditioner:
    """Inverse of a layered-medium system, applied mode by mode.

    All N almost-banded mode systems are factored once (in one batched
    factorization) and reused across applications, so the preconditioner is
    a fixed linear operator.
    """

    def __init__(self, system: TensorSystem, profile=None, resolve_tol: float = 1e-10):
        modes = system.modes
        if profile is None:
            psi = self._mean_profile(system)
        elif isinstance(profile, ChebCoeffs):
            psi = profile
        else:
            psi = cheb_resolve(profile, resolve_tol)
        self.M = system.M
        self.N = modes.N
        self.profile_coeffs = psi
        self._factor = layered_mode_factor(modes, system.M, psi, system.w2mu)
        self.systems_factored = self.N

    @staticmethod
    def _mean_profile(system: TensorSystem) -> ChebCoeffs:
        """x-average of the resolved medium: sum_k mean(phi_k) psi_k."""
        length = max(c.coeffs.size for c in system.psi_coeffs)
        acc = np.zeros(length, dtype=complex)
        for mean, cpsi in zip(system.phi_means, system.psi_coeffs):
            acc[: cpsi.coeffs.size] += mean * cpsi.coeffs
        return ChebCoeffs(acc)

    def apply(self, z: np.ndarray) -> np.ndarray:
        """Solve the layered system for a residual-ordered right-hand side."""
        M, N = self.M, self.N
        rhs = np.empty((M, N), dtype=complex)
        rhs[0] = z[:N]
        rhs[1] = z[N : 2 * N]
        rhs[2:] = z[2 * N :].reshape(N, M - 2).T
        x = self._factor.solve(rhs)
        return x.T.reshape(-1)


def solve_tensor_gmres(
    system: TensorSystem,
    precond: LayeredPreconditioner | None = None,
    tol: float = 1e-8,
    maxit: int = 200,
) -> tuple[SolutionField, GmresResult]:
    """Matrix-free GMRES solve of the assembled system."""
    result = gmres(
        lambda v: apply_operator(system, v),
        system.rhs,
        tol=tol,
        maxit=maxit,
        precond=precond.apply if precond is not None else None,
    )
    coeffs = result.x.reshape(system.modes.N, system.M).T
    return SolutionField(coeffs, "coeff", system.modes), result


def solve_tensor_auto(
    problem: ProblemSpec,
    M: int,
    N: int,
    q: int | None = None,
    resolve_tol: float = 1e-12,
    check_truncation: bool = True,
    dense_cap: int = DENSE_CAP_DEFAULT,
    gmres_tol: float = 1e-8,
    gmres_maxit: int = 200,
    precond_profile=None,
    use_precond: bool = True,
) -> tuple[SolutionField, KrylovLog | None]:
    """Dispatch: layered fast path, dense below the cap, else GMRES."""
    if problem.medium.is_layered:
        return (
            solve_layered_tensor(problem, M, N, q, resolve_tol, check_truncation),
            None,
        )
    system = assemble_tensor(problem, M, N, q, resolve_tol, check_truncation)
    if system.n_unknowns <= dense_cap:
        return solve_tensor_dense(system, dense_cap), None
    precond = (
        LayeredPreconditioner(system, profile=precond_profile) if use_precond else None
    )
    solution, result = solve_tensor_gmres(system, precond, gmres_tol, gmres_maxit)
    if not result.converged:
        raise NotConvergedError(
            f"GMRES stalled at relative residual {result.log.residuals[-1]:.3e} "
            f"after {result.log.iterations} iterations",
            log=result.log,
        )
    return solution, result.log
