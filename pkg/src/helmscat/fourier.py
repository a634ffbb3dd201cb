"""Fourier collocation matrices and coefficient-space operators.

Grid convention: x_n = 2*pi*n/N for n = 1..N, so the right endpoint 2*pi is
included and 0 is excluded.  Mode windows are contiguous integer ranges
j = 1-q..N-q, stored in arrays of length N whose position k (0-based) holds
mode j = 1-q+k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .banded import BandedOperator
from .errors import ResolutionError

# below this size, discrete Fourier transforms go through the dense unitary
# matrices so small cases stay exactly reproducible
DIRECT_DFT_MAX = 64


@dataclass(frozen=True)
class TrigCoeffs:
    """Fourier coefficients on the mode window j = 1-q..N-q."""

    coeffs: np.ndarray
    q: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coeffs must be a nonempty vector")
        if not 1 <= self.q <= self.coeffs.size:
            raise ValueError("offset q out of range")

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    @property
    def js(self) -> np.ndarray:
        return np.arange(1 - self.q, self.n_modes - self.q + 1)

    @property
    def degree(self) -> int:
        return int(np.max(np.abs(self.js)))

    def coeff(self, j: int) -> complex:
        k = j + self.q - 1
        if 0 <= k < self.n_modes:
            return self.coeffs[k]
        return 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(1j * np.multiply.outer(x, self.js)) @ self.coeffs


def fourier_grid(N: int) -> np.ndarray:
    """Equispaced points x_n = 2*pi*n/N, n = 1..N."""
    return 2.0 * np.pi * np.arange(1, N + 1) / N


def fourier_diff_matrices(N: int) -> tuple[np.ndarray, np.ndarray]:
    """First- and second-order Fourier differentiation matrices.

    Closed forms differ between odd N (csc variants) and even N (cot/csc^2
    variants); both differentiate trigonometric interpolants on the N-point
    grid exactly below the Nyquist mode.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    h = 2.0 * np.pi / N
    diff = np.arange(N)[:, None] - np.arange(N)[None, :]
    sign = (-1.0) ** diff
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sin(diff * h / 2.0)
        c = np.cos(diff * h / 2.0)
        if N % 2 == 1:
            dx = 0.5 * sign / s
            dxx = -0.5 * sign * c / s**2
        else:
            dx = 0.5 * sign * c / s
            dxx = -0.5 * sign / s**2
    np.fill_diagonal(dx, 0.0)
    if N % 2 == 1:
        np.fill_diagonal(dxx, -np.pi**2 / (3.0 * h**2) + 1.0 / 12.0)
    else:
        np.fill_diagonal(dxx, -np.pi**2 / (3.0 * h**2) - 1.0 / 6.0)
    return dx, dxx


def dft_matrices(N: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Unitary DFT matrices F and its mode-window-shifted variant G.

    F has (i, j) entry exp(-2i*pi*(i-1)(j-1)/N)/sqrt(N); G shifts the row
    (mode) index by the window offset q and the column (grid) index by one,
    so row i of G analyzes mode i-q on the grid x_1..x_N.
    """
    if not 1 <= q <= N:
        raise ValueError("offset q out of range")
    i = np.arange(N)
    f = np.exp(-2j * np.pi * np.outer(i, i) / N) / np.sqrt(N)
    g = np.exp(-2j * np.pi * np.outer(i + 1 - q, i + 1) / N) / np.sqrt(N)
    return f, g


def fourier_symbols(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of F D_x F^* and F D_xx F^* in FFT-natural mode order.

    For even N the Nyquist entry of the first-derivative symbol is zero
    while the second-derivative symbol keeps -(N/2)^2, so the second symbol
    is not the square of the first.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    k = np.fft.fftfreq(N, 1.0 / N)
    lam_xx = -(k**2) + 0j
    kx = k.copy()
    if N % 2 == 0:
        kx[N // 2] = 0.0
    lam_x = 1j * kx
    return lam_x, lam_xx


def toeplitz_mult(a: TrigCoeffs, N: int, q: int) -> BandedOperator:
    """Mode-window section of the Toeplitz multiplication operator of a.

    Row j, column k of the section holds the Fourier coefficient a_{j-k},
    giving bandwidth equal to the trigonometric degree of a.  The section is
    independent of q because entries depend only on j - k.
    """
    n = a.degree
    diags = {}
    for off in range(-min(n, N - 1), min(n, N - 1) + 1):
        diags[off] = np.full(N, a.coeff(-off), dtype=complex)
    if not diags:
        diags[0] = np.full(N, a.coeff(0), dtype=complex)
    return BandedOperator(N, diags)


def _to_fft_order(values: np.ndarray, axis: int) -> np.ndarray:
    # grid runs n = 1..N with x_N = 2*pi == 0, so FFT sample k=0 is entry N-1
    return np.roll(values, 1, axis=axis)


def grid_to_modes(values: np.ndarray, q: int, axis: int = -1) -> np.ndarray:
    """Windowed Fourier coefficients c_j, j = 1-q..N-q, of grid samples."""
    values = np.asarray(values, dtype=complex)
    N = values.shape[axis]
    if N <= DIRECT_DFT_MAX:
        _, g = dft_matrices(N, q)
        moved = np.moveaxis(values, axis, 0)
        return np.moveaxis((g @ moved.reshape(N, -1)).reshape(moved.shape), 0, axis) / np.sqrt(N)
    chat = np.fft.fft(_to_fft_order(values, axis), axis=axis) / N
    js = np.arange(1 - q, N - q + 1)
    return np.take(chat, js % N, axis=axis)


def modes_to_grid(coeffs: np.ndarray, q: int, axis: int = -1) -> np.ndarray:
    """Grid samples of the trigonometric series with windowed coefficients."""
    coeffs = np.asarray(coeffs, dtype=complex)
    N = coeffs.shape[axis]
    if N <= DIRECT_DFT_MAX:
        _, g = dft_matrices(N, q)
        moved = np.moveaxis(coeffs, axis, 0)
        out = (g.conj().T @ moved.reshape(N, -1)).reshape(moved.shape) * np.sqrt(N)
        return np.moveaxis(out, 0, axis)
    js = np.arange(1 - q, N - q + 1)
    chat = np.zeros_like(coeffs)
    idx = [slice(None)] * coeffs.ndim
    src = [slice(None)] * coeffs.ndim
    for pos, j in enumerate(js):
        idx[axis] = j % N
        src[axis] = pos
        chat[tuple(idx)] = coeffs[tuple(src)]
    return np.roll(np.fft.ifft(chat, axis=axis) * N, -1, axis=axis)


def trig_resolve(f, tol: float = 1e-12, max_size: int = 2**16) -> TrigCoeffs:
    """Adaptively resolve a 2*pi-periodic function into a symmetric window.

    Doubles the sampling grid from 16 until the top 10% of modes (by |j|)
    fall below tol times the largest coefficient, then trims the window to
    the last significant degree.
    """
    size = 16
    while size <= max_size:
        x = 2.0 * np.pi * np.arange(size) / size
        vals = np.asarray(f(x), dtype=complex)
        if vals.shape != x.shape:
            vals = np.array([f(xi) for xi in x], dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise ValueError("function returned non-finite values")
        chat = np.fft.fft(vals) / size
        js = np.fft.fftfreq(size, 1.0 / size).astype(int)
        mags = np.abs(chat)
        scale = mags.max()
        if scale == 0.0:
            return TrigCoeffs(np.zeros(1), 1)
        tail_count = max(1, size // 10)
        order = np.argsort(np.abs(js), kind="stable")
        tail = order[-tail_count:]
        if np.all(mags[tail] <= tol * scale):
            # trim a decade below the acceptance threshold so the dropped
            # tail cannot accumulate to tol * scale
            keep = np.abs(js)[mags > 0.1 * tol * scale]
            n = int(keep.max()) if keep.size else 0
            window = np.arange(-n, n + 1)
            coeffs = chat[window % size]
            return TrigCoeffs(coeffs, n + 1)
        size *= 2
    raise ResolutionError(f"no trigonometric convergence below size {max_size}")
