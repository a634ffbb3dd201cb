"""Full (no-restart) GMRES with optional left preconditioning."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BreakdownError

ARNOLDI_BREAKDOWN_TOL = 1e-14


@dataclass
class KrylovLog:
    """Relative (preconditioned) residual history, starting at 1."""

    residuals: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return max(len(self.residuals) - 1, 0)


@dataclass
class GmresResult:
    x: np.ndarray
    log: KrylovLog
    converged: bool


def gmres(apply, b: np.ndarray, tol: float = 1e-8, maxit: int = 200, precond=None) -> GmresResult:
    """Solve A x = b by full GMRES from a zero initial guess.

    ``apply`` maps a vector to A times it; ``precond``, when given, maps a
    vector to an approximate inverse application and is used on the left,
    so the convergence test is on ||M^-1 (b - A x)|| / ||M^-1 b||.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=complex)
    op = (lambda v: precond(apply(v))) if precond is not None else apply
    r0 = precond(b) if precond is not None else b
    beta = np.linalg.norm(r0)
    log = KrylovLog([1.0])
    if beta == 0.0:
        return GmresResult(np.zeros_like(b), log, True)

    n = b.size
    maxit = min(maxit, n)
    basis = [r0 / beta]
    hess = np.zeros((maxit + 1, maxit), dtype=complex)
    cs = np.zeros(maxit, dtype=complex)
    sn = np.zeros(maxit, dtype=complex)
    g = np.zeros(maxit + 1, dtype=complex)
    g[0] = beta

    def assemble(k: int) -> np.ndarray:
        y = np.linalg.solve(hess[: k + 1, : k + 1], g[: k + 1])
        return np.stack(basis[: k + 1], axis=1) @ y

    for k in range(maxit):
        w = op(basis[k])
        for i in range(k + 1):
            hess[i, k] = np.vdot(basis[i], w)
            w = w - hess[i, k] * basis[i]
        h_next = np.linalg.norm(w)
        # rotate the new column through the accumulated Givens rotations
        for i in range(k):
            t = cs[i] * hess[i, k] + sn[i] * hess[i + 1, k]
            hess[i + 1, k] = -np.conj(sn[i]) * hess[i, k] + np.conj(cs[i]) * hess[i + 1, k]
            hess[i, k] = t
        denom = np.sqrt(abs(hess[k, k]) ** 2 + h_next**2)
        if denom == 0.0:
            raise BreakdownError("Hessenberg column vanished")
        cs[k] = np.conj(hess[k, k]) / denom
        sn[k] = h_next / denom
        hess[k, k] = denom
        g[k + 1] = -np.conj(sn[k]) * g[k]
        g[k] = cs[k] * g[k]
        res = abs(g[k + 1]) / beta
        log.residuals.append(float(res))
        if res <= tol:
            return GmresResult(assemble(k), log, True)
        if h_next <= ARNOLDI_BREAKDOWN_TOL:
            raise BreakdownError(
                f"Arnoldi norm {h_next:.3e} underflowed at iteration {k + 1} "
                f"with residual {res:.3e}"
            )
        basis.append(w / h_next)
    return GmresResult(assemble(maxit - 1), log, False)
