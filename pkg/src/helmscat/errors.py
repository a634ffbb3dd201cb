"""Exception types shared across the solver stack."""


class HelmscatError(Exception):
    """Base class for all solver errors."""


class ResonanceError(HelmscatError):
    """A vertical wavenumber is (numerically) zero: grazing/Wood anomaly."""


class TruncationError(HelmscatError):
    """A propagating mode falls outside the truncated mode window."""


class MediumMismatchError(HelmscatError):
    """Permittivity does not match the ambient constants near y = +-1."""


class ResolutionError(HelmscatError):
    """Adaptive resolution failed to converge below the size cap."""


class SingularSystemError(HelmscatError):
    """Pivot breakdown while factoring a discrete system."""


class SizeCapError(HelmscatError):
    """Requested dense solve exceeds the configured unknown cap."""


class BreakdownError(HelmscatError):
    """Arnoldi vector norm underflowed before reaching the residual target."""


class NotConvergedError(HelmscatError):
    """Iterative solve hit the iteration cap; carries the residual log."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log


class RankExceededError(HelmscatError):
    """Low-rank construction hit max_rank before meeting the tolerance.

    Carries the best approximant found so far in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
