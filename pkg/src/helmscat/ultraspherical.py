"""Ultraspherical coefficient-space operators and the almost-banded solver.

Differentiation maps Chebyshev T coefficients of the lambda-th derivative
into the Gegenbauer C^(lambda) basis, where it is a single scaled
superdiagonal; conversion and multiplication operators are banded, so a
second-order ODE discretizes to a banded body plus a few dense boundary
rows.  Such systems factor in O(bandwidth^2 * size) by Givens QR that keeps
the boundary rows as a rank-r correction.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .banded import BandedOperator
from .chebyshev import ChebCoeffs
from .errors import SingularSystemError

PIVOT_REL_TOL = 1e-14


def diff_operator(lam: int, M: int) -> BandedOperator:
    """M x M section of the lambda-th differentiation operator D_lambda.

    Single superdiagonal at offset lambda with entries
    2^(lambda-1)*(lambda-1)! * (lambda, lambda+1, ...).
    """
    if lam < 1:
        raise ValueError("lam must be at least 1")
    if lam >= M:
        raise ValueError("lam must be smaller than M")
    pref = 2.0 ** (lam - 1) * factorial(lam - 1)
    d = np.zeros(M, dtype=complex)
    d[: M - lam] = pref * (lam + np.arange(M - lam))
    return BandedOperator(M, {lam: d})


def conversion_operator(lam: int, M: int) -> BandedOperator:
    """M x M section of S_lam, converting C^(lam) to C^(lam+1) coefficients.

    S_0 converts Chebyshev T to C^(1).  Both are bidiagonal with a gap:
    offsets 0 and +2.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    j = np.arange(M, dtype=float)
    if lam == 0:
        diag = np.where(j == 0, 1.0, 0.5).astype(complex)
        upper = np.full(M, -0.5, dtype=complex)
    else:
        diag = np.where(j == 0, 1.0, lam / (lam + j)).astype(complex)
        upper = (-lam / (lam + j + 2)).astype(complex)
    return BandedOperator(M, {0: diag, 2: upper})


def convert_coeffs(coeffs: np.ndarray, to_lam: int) -> np.ndarray:
    """Convert a Chebyshev coefficient vector into the C^(to_lam) basis."""
    out = np.asarray(coeffs, dtype=complex).copy()
    for lam in range(to_lam):
        out = conversion_operator(lam, out.size) @ out
    return out


def mult_operator_cheb(a: ChebCoeffs, M: int) -> BandedOperator:
    """M x M section of Chebyshev-series multiplication by a.

    Half Toeplitz (symmetric, diagonal 2*a_0) plus half Hankel with zero
    first row; bandwidth equals the degree of a.
    """
    ac = a.coeffs
    n = a.degree
    i = np.arange(M)
    def coeff(k):
        k = np.asarray(k)
        out = np.zeros(k.shape, dtype=complex)
        ok = (k >= 0) & (k <= n)
        out[ok] = ac[k[ok]]
        return out

    diags: dict[int, np.ndarray] = {}
    for d in range(0, min(n, M - 1) + 1):
        toe = 0.5 * (2.0 * ac[0] if d == 0 else ac[d] if d <= n else 0.0)
        han_up = 0.5 * coeff(2 * i + d)
        han_up[0] = 0.0
        diags[d] = toe + han_up
        if d > 0:
            han_lo = 0.5 * coeff(2 * i - d)
            han_lo[0] = 0.0
            diags[-d] = toe + han_lo
    return BandedOperator(M, diags)


def jacobi_operator(lam: int, M: int) -> BandedOperator:
    """Coefficient-space multiplication by y in the C^(lam) basis.

    From y*C_n = (n+1)/(2(n+lam)) C_{n+1} + (n+2lam-1)/(2(n+lam)) C_{n-1}.
    """
    n = np.arange(M, dtype=float)
    sub = np.zeros(M, dtype=complex)
    sub[1:] = n[1:] / (2.0 * (n[1:] - 1.0 + lam))
    sup = (n + 2.0 * lam) / (2.0 * (n + 1.0 + lam))
    return BandedOperator(M, {-1: sub, 1: sup})


def mult_operator_ultra(a_coeffs: np.ndarray, lam: int, M: int) -> BandedOperator:
    """M x M section of C^(lam)-series multiplication by a (C^(lam) coeffs).

    Built as sum_k a_k C_k(J) where J is the Jacobi operator above, via the
    three-term recurrence on operators; evaluated on a padded size so the
    returned section is exact.
    """
    if lam < 1:
        raise ValueError("lam must be at least 1 (use mult_operator_cheb for T series)")
    ac = np.asarray(a_coeffs, dtype=complex)
    n = ac.size - 1
    pad = M + n + 2
    jac = jacobi_operator(lam, pad)
    p_prev = BandedOperator.identity(pad)
    acc = ac[0] * p_prev
    if n >= 1:
        p_cur = (2.0 * lam) * jac
        acc = acc + ac[1] * p_cur
        for k in range(1, n):
            p_next = (2.0 * (k + lam) / (k + 1.0)) * (jac @ p_cur) - (
                (k + 2.0 * lam - 1.0) / (k + 1.0)
            ) * p_prev
            acc = acc + ac[k + 1] * p_next
            p_prev, p_cur = p_cur, p_next
    return acc.truncate(M)


def assemble_ode(
    a: ChebCoeffs, b: ChebCoeffs, c: ChebCoeffs, M: int
) -> tuple[BandedOperator, BandedOperator]:
    """Banded discretization of a(y)w'' + b(y)w' + c(y)w in C^(2) rows.

    Returns the M x M operator section and the double-conversion section
    S_1 S_0 used to recast right-hand sides into C^(2) coefficients.
    """
    deg = max(a.degree, b.degree, c.degree)
    pad = M + deg + 6
    s0 = conversion_operator(0, pad)
    s1 = conversion_operator(1, pad)
    op = s1 @ (s0 @ mult_operator_cheb(c, pad))
    if np.any(b.coeffs != 0):
        m1 = mult_operator_ultra(convert_coeffs(b.coeffs, 1), 1, pad)
        op = op + s1 @ (m1 @ diff_operator(1, pad))
    if np.any(a.coeffs != 0):
        m2 = mult_operator_ultra(convert_coeffs(a.coeffs, 2), 2, pad)
        op = op + m2 @ diff_operator(2, pad)
    return op.truncate(M), (s1 @ s0).truncate(M)


# ---------------------------------------------------------------------------
# almost-banded systems


@dataclass
class AlmostBandedSystem:
    """r dense rows on top of a banded body, sharing one square size m.

    ``body`` is an m x m banded operator whose first m - r rows occupy rows
    r..m-1 of the system (the trailing rows are the ones displaced by the
    boundary rows).  ``rhs`` is ordered the same way.
    """

    dense_rows: np.ndarray
    body: BandedOperator
    rhs: np.ndarray

    def __post_init__(self):
        self.dense_rows = np.atleast_2d(np.asarray(self.dense_rows, dtype=complex))
        self.rhs = np.asarray(self.rhs, dtype=complex)
        r, m = self.dense_rows.shape
        if self.body.size != m or self.rhs.shape != (m,):
            raise ValueError("inconsistent system shapes")
        if r >= m:
            raise ValueError("need fewer dense rows than unknowns")

    def toarray(self) -> np.ndarray:
        m = self.body.size
        r = self.dense_rows.shape[0]
        a = np.zeros((m, m), dtype=complex)
        a[:r] = self.dense_rows
        a[r:] = self.body.toarray()[: m - r]
        return a


class AlmostBandedFactor:
    """QR factorization of a batch of structurally identical systems.

    The matrix is viewed as a banded part plus a rank-r part (the dense
    rows); one Householder reflector per column triangularizes the banded
    part while carrying the rank part as per-row coefficient vectors, so
    factoring costs O((L + U) * L * m) per system and each solve
    O((L + U + r) * m).
    """

    def __init__(self, dense_rows: np.ndarray, body_diags: dict[int, np.ndarray], m: int):
        # dense_rows: (r, m, B); body_diags[off]: (m, B) indexed by body row
        self.m = m
        self.r, _, self.B = dense_rows.shape
        r = self.r
        glo = min(off - r for off in body_diags)
        ghi = max(off - r for off in body_diags)
        self.L = max(-glo, r - 1, 0)
        self.U = max(ghi, 0)
        width = 2 * self.L + self.U + 1
        w = np.zeros((m, width, self.B), dtype=complex)
        for off, d in body_diags.items():
            goff = off - r
            col = goff + self.L
            rows = np.arange(max(0, -goff, r), min(m, m - goff))
            if rows.size:
                w[rows, col] = d[rows - r]
        self.scale = np.abs(w).max(axis=(0, 1))
        self.scale = np.maximum(self.scale, np.abs(dense_rows).max(axis=(0, 1)))
        self.V = dense_rows.copy()
        self.Ut = np.zeros((m, r, self.B), dtype=complex)
        self.Ut[np.arange(r), np.arange(r)] = 1.0
        self._reflectors: list[tuple[int, np.ndarray, np.ndarray]] = []
        self._triangularize(w)
        self.W = w
        self._check_pivots()

    def _triangularize(self, w):
        m, L, U = self.m, self.L, self.U
        for j in range(m - 1):
            lj = min(L, m - 1 - j)
            if lj < 1:
                continue
            rows = np.arange(j, j + lj + 1)
            # full column-j entries, band plus rank part
            col = w[rows, L + j - rows, :].copy()
            col += np.einsum("irb,rb->ib", self.Ut[rows], self.V[:, j])
            norm = np.sqrt(np.sum(np.abs(col) ** 2, axis=0))
            alpha = col[0]
            mag = np.abs(alpha)
            phase = np.where(mag > 0, alpha / np.where(mag > 0, mag, 1.0), 1.0)
            v = col
            v[0] += phase * norm
            denom = np.sum(np.abs(v) ** 2, axis=0)
            coef = np.where(denom > 0, 2.0 / np.where(denom > 0, denom, 1.0), 0.0)
            hi_col = min(j + L + U, m - 1)
            cidx = (L + j - rows)[:, None] + np.arange(hi_col - j + 1)[None, :]
            block = w[rows[:, None], cidx, :]
            proj = coef[None, :] * np.einsum("ib,icb->cb", np.conj(v), block)
            w[rows[:, None], cidx, :] = block - v[:, None, :] * proj[None, :, :]
            ub = self.Ut[rows]
            proju = coef[None, :] * np.einsum("ib,ikb->kb", np.conj(v), ub)
            self.Ut[rows] = ub - v[:, None, :] * proju[None, :, :]
            self._reflectors.append((j, v, coef))

    def _check_pivots(self):
        m, L = self.m, self.L
        diag = self.W[:, L, :].copy()
        for rho in range(self.r):
            diag += self.Ut[:, rho, :] * self.V[rho, np.arange(m), :]
        bad = np.abs(diag) < PIVOT_REL_TOL * self.scale[None, :]
        if bad.any():
            i, b = np.argwhere(bad)[0]
            raise SingularSystemError(f"pivot {i} below threshold (batch element {b})")
        self._diag = diag

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for one right-hand side per batch element.

        rhs has shape (m, B), or (m,) when the batch has a single element.
        """
        single = rhs.ndim == 1
        g = np.asarray(rhs, dtype=complex).reshape(self.m, -1).copy()
        if g.shape[1] != self.B:
            raise ValueError("right-hand side batch size mismatch")
        for j, i, ca, cb in self._rotations:
            gj, gi = g[j].copy(), g[i]
            g[j] = ca * gj + cb * gi
            g[i] = -np.conj(cb) * gj + np.conj(ca) * gi
        m, L, U, r = self.m, self.L, self.U, self.r
        x = np.zeros((m, self.B), dtype=complex)
        suffix = np.zeros((r, self.B), dtype=complex)
        for i in range(m - 1, -1, -1):
            hi_col = min(i + L + U, m - 1)
            acc = g[i].copy()
            if hi_col > i:
                n_cols = hi_col - i
                band = self.W[i, L + 1 : L + 1 + n_cols]
                acc -= np.einsum("cb,cb->b", band, x[i + 1 : i + 1 + n_cols])
            acc -= np.einsum("rb,rb->b", self.Ut[i], suffix)
            x[i] = acc / self._diag[i]
            suffix += self.V[:, i, :] * x[i][None, :]
        return x[:, 0] if single else x


def factor_almost_banded(dense_rows: np.ndarray, body: BandedOperator) -> AlmostBandedFactor:
    """Factor a single almost-banded system given its parts."""
    dense_rows = np.atleast_2d(np.asarray(dense_rows, dtype=complex))
    r, m = dense_rows.shape
    if body.size != m:
        raise ValueError("body size does not match dense rows")
    body_diags = {off: d[:, None] for off, d in body.diags.items()}
    return AlmostBandedFactor(dense_rows[:, :, None], body_diags, m)


def solve_almost_banded(system: AlmostBandedSystem) -> np.ndarray:
    """Solve an almost-banded system; residual is at Givens-QR level."""
    factor = factor_almost_banded(system.dense_rows, system.body)
    return factor.solve(system.rhs)
