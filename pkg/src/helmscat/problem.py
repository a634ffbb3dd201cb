"""Scattering problem definition: incident wave, medium, mode constants.

The incident plane wave exp(i*alpha0*x - i*beta0*y) comes from above at
angle theta; horizontal wavenumbers of the scattered field are
alpha_j = alpha0 + j, and the vertical wavenumbers beta_j (above) and
gamma_j (below) are square roots of omega^2*eps*mu - alpha_j^2 taken on
the outgoing branch Im >= 0, positive real when real.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sin

import numpy as np

from .chebyshev import barycentric_interp, cheb_points
from .errors import MediumMismatchError, ResonanceError, TruncationError
from .fourier import grid_to_modes

BOUNDARY_MATCH_TOL = 1e-10
RESONANCE_REL_TOL = 1e-10


@dataclass(frozen=True)
class IncidentWave:
    """Incident plane wave and ambient material constants."""

    omega: float
    theta: float
    eps_plus: complex = 1.0 + 0j
    eps_minus: complex = 1.0 + 0j
    mu: float = 1.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if not abs(self.theta) < np.pi / 2:
            raise ValueError("theta must lie strictly inside (-pi/2, pi/2)")
        if self.mu <= 0:
            raise ValueError("mu must be positive")

    @property
    def alpha0(self) -> complex:
        a = self.omega * np.sqrt(complex(self.eps_plus) * self.mu) * sin(self.theta)
        return a.real if a.imag == 0 else a

    @property
    def beta0(self) -> complex:
        return _outgoing_root(self.omega**2 * complex(self.eps_plus) * self.mu - self.alpha0**2)

    @property
    def gamma0(self) -> complex:
        return _outgoing_root(self.omega**2 * complex(self.eps_minus) * self.mu - self.alpha0**2)


def _outgoing_root(z: complex) -> complex:
    """Square root with Im >= 0, and positive real part when purely real."""
    r = np.sqrt(complex(z))
    if r.imag < 0:
        r = -r
    if r.imag == 0 and r.real < 0:
        r = -r
    return r


@dataclass(frozen=True)
class ModeConstants:
    """Quasi-periodic mode constants on the window j = 1-q..N-q."""

    N: int
    q: int
    alphas: np.ndarray
    betas: np.ndarray
    gammas: np.ndarray
    propagating_up: tuple[int, ...]
    propagating_down: tuple[int, ...]

    @property
    def js(self) -> np.ndarray:
        return np.arange(1 - self.q, self.N - self.q + 1)

    @property
    def alpha0(self) -> complex:
        return self.alphas[self.q - 1]

    @property
    def beta0(self) -> complex:
        return self.betas[self.q - 1]

    @property
    def gamma0(self) -> complex:
        return self.gammas[self.q - 1]

    def index_of(self, j: int) -> int:
        """Storage position of mode j."""
        k = j + self.q - 1
        if not 0 <= k < self.N:
            raise IndexError(f"mode {j} outside window")
        return k


def _propagating_range(k2: complex, alpha0: complex) -> list[int]:
    """All integers j with real positive k2 - (alpha0+j)^2, or [] if none."""
    if k2.imag != 0 or (isinstance(alpha0, complex) and alpha0.imag != 0):
        return []
    half = np.sqrt(k2.real)
    lo = int(np.floor(-half - alpha0.real)) + 1
    hi = int(np.ceil(half - alpha0.real)) - 1
    return [j for j in range(lo, hi + 1) if k2.real - (alpha0.real + j) ** 2 > 0]


def mode_constants(
    wave: IncidentWave, N: int, q: int | None = None, check_truncation: bool = True
) -> ModeConstants:
    """Mode constants alpha_j, beta_j, gamma_j on the truncation window.

    With q omitted, the window is centered at j = 0 via q = floor(N/2)+1.
    Raises ResonanceError when a vertical wavenumber is within
    1e-10*omega of zero, and TruncationError when a propagating mode falls
    outside the window (disable with check_truncation=False).
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if q is None:
        q = N // 2 + 1
    if not 1 <= q <= N:
        raise ValueError("q must satisfy 1 <= q <= N")
    js = np.arange(1 - q, N - q + 1)
    alpha0 = wave.alpha0
    alphas = alpha0 + js.astype(complex)
    k2_plus = wave.omega**2 * complex(wave.eps_plus) * wave.mu
    k2_minus = wave.omega**2 * complex(wave.eps_minus) * wave.mu
    betas = np.array([_outgoing_root(k2_plus - a**2) for a in alphas])
    gammas = np.array([_outgoing_root(k2_minus - a**2) for a in alphas])

    guard = RESONANCE_REL_TOL * wave.omega
    small = np.abs(betas) < guard
    if small.any():
        raise ResonanceError(f"beta_j below {guard:.3e} at j = {js[small].tolist()}")
    small = np.abs(gammas) < guard
    if small.any():
        raise ResonanceError(f"gamma_j below {guard:.3e} at j = {js[small].tolist()}")

    prop_up = tuple(_propagating_range(k2_plus, alpha0))
    prop_down = tuple(_propagating_range(k2_minus, alpha0))
    if check_truncation:
        outside = [j for j in (*prop_up, *prop_down) if not 1 - q <= j <= N - q]
        if outside:
            raise TruncationError(
                f"propagating modes {sorted(set(outside))} outside window [{1 - q}, {N - q}]"
            )
    prop_up = tuple(j for j in prop_up if 1 - q <= j <= N - q)
    prop_down = tuple(j for j in prop_down if 1 - q <= j <= N - q)
    return ModeConstants(N, q, alphas, betas, gammas, prop_up, prop_down)


# ---------------------------------------------------------------------------
# medium descriptions


class MediumSpec:
    """Permittivity eps(x, y) on [0, 2*pi] x [-1, 1]."""

    def evaluate(self, x, y) -> np.ndarray:
        """Pointwise permittivity; x and y broadcast together."""
        raise NotImplementedError

    @property
    def is_layered(self) -> bool:
        """True when eps depends on y only."""
        return False

    def separable_terms(self):
        """List of (phi(x), psi(y)) callables whose products sum to eps."""
        raise TypeError(f"{type(self).__name__} has no separable representation")


@dataclass(frozen=True)
class Homogeneous(MediumSpec):
    value: complex = 1.0 + 0j

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
        return np.full(x.shape, complex(self.value))

    @property
    def is_layered(self) -> bool:
        return True

    def separable_terms(self):
        v = complex(self.value)
        return [(lambda x: np.ones_like(np.asarray(x, dtype=float)) + 0j, lambda y: np.full_like(np.asarray(y, dtype=float), v, dtype=complex))]


@dataclass(frozen=True)
class Layered(MediumSpec):
    """Vertically layered permittivity eps(x, y) = profile(y)."""

    profile: object  # callable y -> complex

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
        return np.asarray(self.profile(y), dtype=complex)

    @property
    def is_layered(self) -> bool:
        return True

    def separable_terms(self):
        return [(lambda x: np.ones_like(np.asarray(x, dtype=float)) + 0j, self.profile)]


@dataclass(frozen=True)
class SeparableSum(MediumSpec):
    """Finite sum of separable terms phi_k(x) * psi_k(y)."""

    terms: tuple  # of (phi, psi) callable pairs

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
        out = np.zeros(x.shape, dtype=complex)
        for phi, psi in self.terms:
            out += np.asarray(phi(x), dtype=complex) * np.asarray(psi(y), dtype=complex)
        return out

    def separable_terms(self):
        return list(self.terms)


@dataclass(frozen=True)
class SampledGrid(MediumSpec):
    """Permittivity sampled on the tensor grid x_n = 2*pi*n/Nx (n=1..Nx) by
    y_m = cos(m*pi/My) (m=0..My); evaluated elsewhere by trigonometric
    interpolation in x and barycentric interpolation in y."""

    values: np.ndarray  # shape (My+1, Nx)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.values.ndim != 2:
            raise ValueError("values must be a 2D grid")

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        nx = self.values.shape[1]
        coeffs = grid_to_modes(self.values, nx // 2 + 1, axis=1)
        js = np.arange(1 - (nx // 2 + 1), nx - (nx // 2 + 1) + 1)
        out = np.empty(x.shape, dtype=complex)
        for idx in np.ndindex(x.shape):
            column = barycentric_interp(coeffs, np.array([y[idx]]))[0]
            out[idx] = column @ np.exp(1j * js * x[idx])
        return out


@dataclass(frozen=True)
class ProblemSpec:
    """Incident wave plus medium description."""

    wave: IncidentWave
    medium: MediumSpec
    delta: float | None = field(default=None, compare=False)

    def validated(self) -> "ProblemSpec":
        delta = validate_medium(self.medium, self.wave)
        return ProblemSpec(self.wave, self.medium, delta)


def validate_medium(medium: MediumSpec, wave: IncidentWave) -> float:
    """Largest dyadic delta whose boundary layers match eps_plus/eps_minus.

    Checks |eps - eps_plus| <= 1e-10 for y in [1-delta/2, 1] and the mirror
    condition below, sampling each layer on a 64x16 grid.  Raises
    MediumMismatchError when eps fails to match at y = +-1 or no layer
    thickness on the search grid can be certified.
    """
    xs = 2.0 * np.pi * np.arange(1, 65) / 64
    top = np.abs(medium.evaluate(xs, np.ones(64)) - wave.eps_plus)
    bot = np.abs(medium.evaluate(xs, -np.ones(64)) - wave.eps_minus)
    if top.max() > BOUNDARY_MATCH_TOL or bot.max() > BOUNDARY_MATCH_TOL:
        raise MediumMismatchError(
            f"eps differs from ambient constants at y = +-1 "
            f"(top defect {top.max():.3e}, bottom defect {bot.max():.3e})"
        )
    for k in range(0, 21):
        delta = 0.5**k
        y_top = np.linspace(1 - delta / 2, 1.0, 16)
        y_bot = np.linspace(-1.0, delta / 2 - 1.0, 16)
        xg, yg = np.meshgrid(xs, y_top)
        ok_top = np.abs(medium.evaluate(xg, yg) - wave.eps_plus).max() <= BOUNDARY_MATCH_TOL
        xg, yg = np.meshgrid(xs, y_bot)
        ok_bot = np.abs(medium.evaluate(xg, yg) - wave.eps_minus).max() <= BOUNDARY_MATCH_TOL
        if ok_top and ok_bot:
            return delta
    raise MediumMismatchError("no boundary layer thickness on the search grid is constant")


def medium_is_real(medium: MediumSpec, samples: int = 32) -> bool:
    """True when eps is real-valued on a coarse sampling grid."""
    xs = 2.0 * np.pi * np.arange(1, samples + 1) / samples
    ys = cheb_points(samples - 1)
    xg, yg = np.meshgrid(xs, ys)
    vals = medium.evaluate(xg, yg)
    return bool(np.max(np.abs(vals.imag)) < 1e-12)


__all__ = [
    "IncidentWave",
    "ModeConstants",
    "MediumSpec",
    "Homogeneous",
    "Layered",
    "SeparableSum",
    "SampledGrid",
    "ProblemSpec",
    "mode_constants",
    "validate_medium",
    "medium_is_real",
]
