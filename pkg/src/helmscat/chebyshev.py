"""Chebyshev grid, differentiation, value/coefficient transforms.

Grid convention: y_m = cos(m*pi/M) for m = 0..M, so y_0 = 1 and y_M = -1
(strictly decreasing).  Coefficient vectors hold T_0..T_degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import ResolutionError

# below this degree, transforms use the dense cosine matrices
DIRECT_DCT_MAX = 32


@dataclass(frozen=True)
class ChebCoeffs:
    """Chebyshev expansion coefficients c_0..c_degree."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coeffs must be a nonempty vector")

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, y):
        return npcheb.chebval(np.asarray(y), self.coeffs)


def cheb_points(M: int) -> np.ndarray:
    """Second-kind Chebyshev points cos(m*pi/M), m = 0..M."""
    return np.cos(np.pi * np.arange(M + 1) / M)


def cheb_diff_matrix(M: int) -> np.ndarray:
    """(M+1)x(M+1) Chebyshev differentiation matrix on second-kind points."""
    if M < 1:
        raise ValueError("M must be at least 1")
    y = cheb_points(M)
    c = np.ones(M + 1)
    c[0] = c[M] = 2.0
    sign = (-1.0) ** (np.arange(M + 1)[:, None] + np.arange(M + 1)[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (c[:, None] / c[None, :]) * sign / (y[:, None] - y[None, :])
    np.fill_diagonal(d, 0.0)
    if M >= 2:
        yi = y[1:M]
        d[np.arange(1, M), np.arange(1, M)] = -yi / (2.0 * (1.0 - yi**2))
    corner = (2.0 * M**2 + 1.0) / 6.0
    d[0, 0] = corner
    d[M, M] = -corner
    return d


def downsampling_matrix(M: int) -> np.ndarray:
    """(M-1)x(M+1) selector deleting the first and last rows of the identity."""
    if M < 2:
        raise ValueError("M must be at least 2")
    return np.eye(M + 1)[1:M]


def _cosine_matrix(M: int) -> np.ndarray:
    m = np.arange(M + 1)
    return np.cos(np.pi * np.outer(m, m) / M)


def vals_to_coeffs(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Chebyshev coefficients of values sampled on the (M+1)-point grid."""
    values = np.asarray(values, dtype=complex)
    moved = np.moveaxis(values, axis, 0)
    M = moved.shape[0] - 1
    if M == 0:
        return values.copy()
    flat = moved.reshape(M + 1, -1)
    if M <= DIRECT_DCT_MAX:
        weights = np.ones(M + 1)
        weights[0] = weights[M] = 2.0
        v2c = 2.0 * _cosine_matrix(M) / (M * np.outer(weights, weights))
        coeffs = v2c @ flat
    else:
        ext = np.concatenate([flat, flat[M - 1 : 0 : -1]], axis=0)
        chat = np.fft.fft(ext, axis=0)[: M + 1]
        coeffs = chat / M
        coeffs[0] /= 2.0
        coeffs[M] /= 2.0
    return np.moveaxis(coeffs.reshape(moved.shape), 0, axis)


def coeffs_to_values(coeffs: np.ndarray, axis: int = 0) -> np.ndarray:
    """Grid samples of the Chebyshev series with the given coefficients."""
    coeffs = np.asarray(coeffs, dtype=complex)
    moved = np.moveaxis(coeffs, axis, 0)
    M = moved.shape[0] - 1
    if M == 0:
        return coeffs.copy()
    flat = moved.reshape(M + 1, -1)
    if M <= DIRECT_DCT_MAX:
        vals = _cosine_matrix(M) @ flat
    else:
        chat = flat * M
        chat[0] *= 2.0
        chat[M] *= 2.0
        ext = np.concatenate([chat, chat[M - 1 : 0 : -1]], axis=0)
        vals = np.fft.ifft(ext, axis=0)[: M + 1]
    return np.moveaxis(vals.reshape(moved.shape), 0, axis)


def cheb_resolve(f, tol: float = 1e-12, max_degree: int = 2**16) -> ChebCoeffs:
    """Adaptively resolve a function on [-1, 1] into a Chebyshev series.

    Doubles the degree from 16 until the trailing 10% of coefficients fall
    below tol times the largest one, then trims negligible trailing terms.
    """
    M = 16
    while M <= max_degree:
        vals = np.asarray(f(cheb_points(M)), dtype=complex)
        if vals.shape != (M + 1,):
            vals = np.array([f(y) for y in cheb_points(M)], dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise ValueError("function returned non-finite values")
        c = vals_to_coeffs(vals)
        mags = np.abs(c)
        scale = mags.max()
        if scale == 0.0:
            return ChebCoeffs(np.zeros(1))
        tail_count = max(1, (M + 1) // 10)
        if np.all(mags[-tail_count:] <= tol * scale):
            # trim a decade below the acceptance threshold so the dropped
            # tail cannot accumulate to tol * scale
            keep = np.nonzero(mags > 0.1 * tol * scale)[0]
            deg = int(keep.max()) if keep.size else 0
            return ChebCoeffs(c[: deg + 1])
        M *= 2
    raise ResolutionError(f"no Chebyshev convergence below degree {max_degree}")


def barycentric_interp(values: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Interpolate grid values (second-kind points along axis 0) at ys.

    Uses the barycentric weights (-1)^m, halved at the endpoints; query
    points that coincide with grid nodes are returned exactly.
    """
    values = np.asarray(values, dtype=complex)
    M = values.shape[0] - 1
    nodes = cheb_points(M)
    w = (-1.0) ** np.arange(M + 1)
    w[0] *= 0.5
    w[M] *= 0.5
    ys = np.asarray(ys, dtype=float)
    flat = values.reshape(M + 1, -1)
    out = np.empty((ys.size,) + flat.shape[1:], dtype=complex)
    diff = ys.reshape(-1, 1) - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-15)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = w[None, :] / diff
    for k in range(ys.size):
        hit = np.nonzero(exact[k])[0]
        if hit.size:
            out[k] = flat[hit[0]]
        else:
            r = ratios[k]
            out[k] = (r @ flat) / r.sum()
    return out.reshape(ys.shape + values.shape[1:])
