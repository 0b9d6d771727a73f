"""Banded matrices and their direct factorizations.

Internal plumbing shared by the model and solver modules. Tridiagonal
systems go through the kernel backend (compiled when available); wider
bands use LAPACK's blocked band LU via scipy.
"""

import numpy as np
from scipy.linalg import lapack as _lapack
from scipy.linalg import blas as _blas

from . import kernels
from .errors import SingularSystemError

PIVOT_THRESHOLD = 1e-14


class BandedOperator:
    """Square banded matrix, diagonals stored LAPACK-style.

    bands[ku + i - j, j] = A[i, j] for -kl <= j - i <= ku.
    """

    def __init__(self, bands, kl, ku):
        bands = np.asarray(bands, dtype=float)
        if bands.ndim != 2 or bands.shape[0] != kl + ku + 1:
            raise ValueError("bands must have kl+ku+1 rows")
        self.bands = bands
        self.kl = int(kl)
        self.ku = int(ku)
        self.n = bands.shape[1]

    @classmethod
    def tridiagonal(cls, lower, diag, upper):
        n = len(diag)
        bands = np.zeros((3, n))
        bands[0, 1:] = upper
        bands[1, :] = diag
        bands[2, :-1] = lower
        return cls(bands, 1, 1)

    @classmethod
    def from_dense(cls, a, kl, ku):
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        bands = np.zeros((kl + ku + 1, n))
        for j in range(n):
            lo = max(0, j - ku)
            hi = min(n, j + kl + 1)
            for i in range(lo, hi):
                bands[ku + i - j, j] = a[i, j]
        return cls(bands, kl, ku)

    @property
    def is_tridiagonal(self):
        return self.kl == 1 and self.ku == 1

    def diagonal(self):
        return self.bands[self.ku, :].copy()

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        return _blas.dgbmv(self.n, self.n, self.kl, self.ku, 1.0, self.bands, v)

    def to_dense(self):
        a = np.zeros((self.n, self.n))
        for r in range(self.kl + self.ku + 1):
            off = self.ku - r  # diagonal offset j - i
            if off >= 0:
                idx = np.arange(self.n - off)
                a[idx, idx + off] = self.bands[r, off:]
            else:
                idx = np.arange(self.n + off)
                a[idx - off, idx] = self.bands[r, : self.n + off]
        return a

    def scale(self):
        return float(np.max(np.abs(self.bands))) if self.n else 0.0

    def shifted(self, tau):
        """A + tau*I."""
        bands = self.bands.copy()
        bands[self.ku, :] += tau
        return BandedOperator(bands, self.kl, self.ku)


class Factorization:
    """LU factors of a BandedOperator; owns nothing shared."""

    def __init__(self, operator):
        self.operator = operator
        self.n = operator.n
        self._scale = operator.scale()
        if operator.is_tridiagonal:
            lower = operator.bands[2, :-1].copy()
            diag = operator.bands[1, :].copy()
            upper = operator.bands[0, 1:].copy()
            self._kind = "tridiag"
            self._factor, self.min_pivot = kernels.tridiag_factor(lower, diag, upper)
        else:
            kl, ku = operator.kl, operator.ku
            ab = np.zeros((2 * kl + ku + 1, self.n))
            ab[kl:, :] = operator.bands
            lu, ipiv, info = _lapack.dgbtrf(ab, kl, ku)
            if info < 0:
                raise ValueError(f"dgbtrf: illegal argument {-info}")
            self._kind = "gb"
            self._factor = (lu, ipiv)
            self.min_pivot = float(np.min(np.abs(lu[kl + ku, :])))

    def is_singular(self, threshold=PIVOT_THRESHOLD):
        return self.min_pivot <= threshold * (1.0 + self._scale)

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self._kind == "tridiag":
            return kernels.tridiag_solve(self._factor, b)
        lu, ipiv = self._factor
        x, info = _lapack.dgbtrs(lu, self.operator.kl, self.operator.ku, b, ipiv)
        if info != 0:
            raise SingularSystemError(f"band solve failed (info={info})", self.min_pivot)
        return x


def factorize(operator):
    return Factorization(operator)
