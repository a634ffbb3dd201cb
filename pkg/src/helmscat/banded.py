"""Square banded complex matrices stored by diagonals.

A :class:`BandedOperator` of size m keeps one full-length array per stored
diagonal offset, so entry ``A[i, i+off]`` lives at ``diags[off][i]``.  The
declared bandwidths are structural: they come from the set of stored offsets,
not from scanning for zeros, which lets callers assert the bandwidth an
operator was constructed with.

Products of truncated sections differ from truncated products near the
bottom-right corner, so code that needs exact sections of infinite-operator
products should build factors on a padded size and ``truncate`` afterwards.
"""

from __future__ import annotations

import numpy as np


def _normalized(size: int, off: int, values: np.ndarray) -> np.ndarray:
    """Return a length-``size`` complex array zeroed outside the valid range."""
    d = np.zeros(size, dtype=complex)
    lo = max(0, -off)
    hi = size - max(0, off)
    if hi > lo:
        d[lo:hi] = np.asarray(values, dtype=complex)[lo:hi]
    return d


class BandedOperator:
    """Banded m-by-m complex matrix with explicit band metadata."""

    def __init__(self, size: int, diags: dict[int, np.ndarray]):
        if size < 1:
            raise ValueError("size must be positive")
        self.size = size
        self.diags: dict[int, np.ndarray] = {}
        for off, values in diags.items():
            if abs(off) >= size and off != 0:
                continue
            arr = np.asarray(values, dtype=complex)
            if arr.shape != (size,):
                raise ValueError(f"diagonal at offset {off} has wrong length")
            self.diags[off] = _normalized(size, off, arr)
        if not self.diags:
            self.diags[0] = np.zeros(size, dtype=complex)

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, size: int) -> "BandedOperator":
        return cls(size, {0: np.ones(size)})

    @classmethod
    def from_banded_dense(cls, a: np.ndarray, lower: int, upper: int) -> "BandedOperator":
        """Wrap a dense array whose entries outside the given bands are zero."""
        m = a.shape[0]
        if a.shape != (m, m):
            raise ValueError("expected a square array")
        diags = {}
        for off in range(-lower, upper + 1):
            d = np.zeros(m, dtype=complex)
            lo, hi = max(0, -off), m - max(0, off)
            d[lo:hi] = np.diagonal(a, off)
            diags[off] = d
        return cls(m, diags)

    # -- metadata ----------------------------------------------------------

    @property
    def lower_bandwidth(self) -> int:
        return max(0, -min(self.diags))

    @property
    def upper_bandwidth(self) -> int:
        return max(0, max(self.diags))

    @property
    def bandwidths(self) -> tuple[int, int]:
        return self.lower_bandwidth, self.upper_bandwidth

    # -- conversions -------------------------------------------------------

    def toarray(self) -> np.ndarray:
        a = np.zeros((self.size, self.size), dtype=complex)
        for off, d in self.diags.items():
            lo, hi = max(0, -off), self.size - max(0, off)
            idx = np.arange(lo, hi)
            a[idx, idx + off] = d[lo:hi]
        return a

    def truncate(self, new_size: int) -> "BandedOperator":
        """Top-left section of the stored matrix."""
        if new_size > self.size:
            raise ValueError("truncate cannot grow the operator")
        return BandedOperator(
            new_size, {off: d[:new_size] for off, d in self.diags.items() if abs(off) < new_size}
        )

    @property
    def T(self) -> "BandedOperator":
        out = {}
        for off, d in self.diags.items():
            shifted = np.zeros(self.size, dtype=complex)
            lo, hi = max(0, -off), self.size - max(0, off)
            shifted[lo + off : hi + off] = d[lo:hi]
            out[-off] = shifted
        return BandedOperator(self.size, out)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "BandedOperator") -> "BandedOperator":
        if self.size != other.size:
            raise ValueError("size mismatch")
        out = {off: d.copy() for off, d in self.diags.items()}
        for off, d in other.diags.items():
            out[off] = out.get(off, 0) + d
        return BandedOperator(self.size, out)

    def __sub__(self, other: "BandedOperator") -> "BandedOperator":
        return self + (-1.0) * other

    def __rmul__(self, scalar: complex) -> "BandedOperator":
        return BandedOperator(self.size, {off: scalar * d for off, d in self.diags.items()})

    def __mul__(self, scalar: complex) -> "BandedOperator":
        return self.__rmul__(scalar)

    def __neg__(self) -> "BandedOperator":
        return (-1.0) * self

    def _matmat_banded(self, other: "BandedOperator") -> "BandedOperator":
        m = self.size
        out: dict[int, np.ndarray] = {}
        for oa, da in self.diags.items():
            for ob, db in other.diags.items():
                off = oa + ob
                if abs(off) >= m:
                    continue
                acc = out.setdefault(off, np.zeros(m, dtype=complex))
                # entry i of product diag: A[i, i+oa] * B[i+oa, i+oa+ob]
                if oa >= 0:
                    acc[: m - oa] += da[: m - oa] * db[oa:]
                else:
                    acc[-oa:] += da[-oa:] * db[: m + oa]
        return BandedOperator(m, out)

    def _matmat_dense(self, x: np.ndarray) -> np.ndarray:
        m = self.size
        vec = x.ndim == 1
        xm = x[:, None] if vec else x
        if xm.shape[0] != m:
            raise ValueError("shape mismatch")
        out = np.zeros((m, xm.shape[1]), dtype=complex)
        for off, d in self.diags.items():
            if off >= 0:
                out[: m - off] += d[: m - off, None] * xm[off:]
            else:
                out[-off:] += d[-off:, None] * xm[: m + off]
        return out[:, 0] if vec else out

    def __matmul__(self, other):
        if isinstance(other, BandedOperator):
            return self._matmat_banded(other)
        return self._matmat_dense(np.asarray(other, dtype=complex))
