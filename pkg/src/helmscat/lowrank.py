"""Separable (low-rank) approximation of bivariate permittivities.

Greedy rank-1 cross elimination with complete pivoting on a tensor sample
grid: at each step the entry of largest residual magnitude is the pivot,
the pivot row and column are resolved into trigonometric/Chebyshev series,
and their outer product (scaled by the inverse pivot) is subtracted.  Slice
series are resolved to a small fraction of the target tolerance measured
against the scale of the original function, not of the (small) slices,
since deep slices carry cancellation noise well above machine precision
relative to themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chebyshev import ChebCoeffs, cheb_points, cheb_resolve
from .errors import RankExceededError
from .fourier import TrigCoeffs, trig_resolve
from .problem import MediumSpec

EXACT_RANK_PIVOT_TOL = 1e-15
SLICE_TOL_FRACTION = 0.01
SLICE_TOL_FLOOR = 1e-14
FINE_CHECK_FACTOR = 3.0
MAX_GRID = 513


@dataclass(frozen=True)
class LowRankTerm:
    phi: TrigCoeffs
    psi: ChebCoeffs
    weight: complex


@dataclass(frozen=True)
class LowRankMedium(MediumSpec):
    """Sum of separable terms weight_k * phi_k(x) * psi_k(y)."""

    terms: tuple[LowRankTerm, ...]
    residual_estimate: float
    source_scale: float

    @property
    def achieved_rank(self) -> int:
        return len(self.terms)

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        out = np.zeros(x.shape, dtype=complex)
        for t in self.terms:
            out += t.weight * t.phi(x) * t.psi(y)
        return out

    def separable_terms(self):
        return [(t.phi, ChebCoeffs(t.weight * t.psi.coeffs)) for t in self.terms]


def _build_on_grid(f, tol: float, max_rank: int, nx: int, my: int):
    xs = 2.0 * np.pi * np.arange(1, nx + 1) / nx
    ys = cheb_points(my)
    xg, yg = np.meshgrid(xs, ys)
    resid = np.asarray(f(xg, yg), dtype=complex)
    scale = float(np.abs(resid).max())
    if scale == 0.0:
        return [], 0.0, 0.0

    terms: list[LowRankTerm] = []

    def residual_fn(x, y):
        out = np.asarray(f(x, y), dtype=complex)
        for t in terms:
            out = out - t.weight * t.phi(np.asarray(x)) * t.psi(np.asarray(y))
        return out

    while True:
        estimate = float(np.abs(resid).max())
        if estimate <= tol * scale:
            break
        if len(terms) == max_rank:
            raise RankExceededError(
                f"residual {estimate:.3e} above {tol * scale:.3e} at rank {max_rank}",
                best=LowRankMedium(tuple(terms), estimate, scale),
            )
        mi, ni = np.unravel_index(int(np.abs(resid).argmax()), resid.shape)
        pivot = complex(residual_fn(xs[ni], ys[mi]))
        if abs(pivot) < EXACT_RANK_PIVOT_TOL * scale:
            break
        row_scale = max(float(np.abs(resid[mi, :]).max()), 1e-300)
        col_scale = max(float(np.abs(resid[:, ni]).max()), 1e-300)
        tol_x = np.clip(SLICE_TOL_FRACTION * tol * scale / row_scale, SLICE_TOL_FLOOR, 0.4)
        tol_y = np.clip(SLICE_TOL_FRACTION * tol * scale / col_scale, SLICE_TOL_FLOOR, 0.4)
        ystar, xstar = ys[mi], xs[ni]
        phi = trig_resolve(lambda x: residual_fn(x, np.full_like(np.asarray(x), ystar)), tol_x)
        psi = cheb_resolve(lambda y: residual_fn(np.full_like(np.asarray(y), xstar), y), tol_y)
        terms.append(LowRankTerm(phi, psi, 1.0 / pivot))
        resid -= np.outer(psi(ys), phi(xs)) / pivot
    return terms, float(np.abs(resid).max()), scale


def gecp_lowrank(f, tol: float = 1e-10, max_rank: int = 20) -> LowRankMedium:
    """Separable approximation of f(x, y) on [0, 2*pi] x [-1, 1].

    Stops when the grid residual drops below tol * max|f| or raises
    RankExceededError (carrying the best approximant so far) at max_rank.
    The sampling grid starts at 65 x 65 and doubles whenever the residual
    on a twice-finer grid exceeds 3x the converged estimate.
    """
    nx, my = 65, 64
    while True:
        terms, estimate, scale = _build_on_grid(f, tol, max_rank, nx, my)
        medium = LowRankMedium(tuple(terms), estimate, scale)
        fine_x = 2.0 * np.pi * np.arange(1, 2 * nx + 1) / (2 * nx)
        fine_y = cheb_points(2 * my)
        xg, yg = np.meshgrid(fine_x, fine_y)
        fine_resid = float(np.abs(np.asarray(f(xg, yg), dtype=complex) - medium.evaluate(xg, yg)).max())
        floor = max(estimate, EXACT_RANK_PIVOT_TOL * scale)
        if fine_resid <= FINE_CHECK_FACTOR * floor or nx >= MAX_GRID:
            return medium
        nx, my = 2 * nx, 2 * my
