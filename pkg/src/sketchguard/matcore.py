"""Dense-matrix foundation: storage, products, norms, and the reduced QR factorization.

All scalars are float64. Matrices are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import substream

__all__ = [
    "DenseMatrix",
    "PowerIterationError",
    "RankDeficiencyError",
    "ZeroMatrixError",
    "matmul_t",
    "linf_norm",
    "frobenius_norm",
    "spectral_norm",
    "stable_rank",
    "reduced_qr",
]


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge; carries the last estimate and iterate."""

    def __init__(self, message: str, estimate: float, iterate: np.ndarray):
        super().__init__(message)
        self.estimate = estimate
        self.iterate = iterate


class RankDeficiencyError(ValueError):
    """A factorization input was numerically rank deficient."""


class ZeroMatrixError(ValueError):
    """An operation undefined for the all-zero matrix received one."""


class DenseMatrix:
    """Immutable row-major float64 matrix with at least one row and column.

    Constructors reject NaN and Inf entries; downstream quantile logic is
    undefined over non-finite values.
    """

    __slots__ = ("_a",)

    def __init__(self, values):
        a = np.array(values, dtype=np.float64, order="C")
        self._a = _validated(a)

    @classmethod
    def _wrap(cls, a: np.ndarray) -> "DenseMatrix":
        # Internal fast path: adopt an owned array without copying.
        m = object.__new__(cls)
        m._a = _validated(np.ascontiguousarray(a, dtype=np.float64))
        return m

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def array(self) -> np.ndarray:
        """Read-only 2-D view of the entries."""
        return self._a

    @property
    def data(self) -> np.ndarray:
        """Read-only flat row-major view of the entries."""
        return self._a.reshape(-1)

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.array_equal(self._a, other._a))

    def __repr__(self) -> str:
        return f"DenseMatrix({self.rows}x{self.cols})"


def _validated(a: np.ndarray) -> np.ndarray:
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"matrix must have at least one row and one column, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite (no NaN or Inf)")
    a.flags.writeable = False
    return a


def matmul_t(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Return the d x d' product of a's transpose with b; rows must match."""
    if a.rows != b.rows:
        raise ValueError(f"row counts differ: {a.rows} vs {b.rows}")
    return DenseMatrix._wrap(a.array.T @ b.array)


def linf_norm(c: DenseMatrix) -> float:
    """Largest absolute entry."""
    return float(np.abs(c.array).max())


def frobenius_norm(c: DenseMatrix) -> float:
    """Square root of the sum of squared entries."""
    return float(np.linalg.norm(c.array))


def spectral_norm(c: DenseMatrix, tol: float = 1e-9, max_iter: int = 5000) -> float:
    """Largest singular value via power iteration on the Gram matrix.

    Deterministic: iteration starts from the normalized all-ones vector and,
    should that land in the null space, restarts from a fixed pseudorandom
    vector. Converges when the estimate changes by at most ``tol`` relative
    on two consecutive iterations.

    Raises PowerIterationError after ``max_iter`` iterations without
    convergence; the exception carries the last estimate and iterate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    a = c.array
    if a.shape[0] < a.shape[1]:
        a = a.T
    n = a.shape[1]
    if not a.any():
        return 0.0
    v = np.full(n, 1.0 / math.sqrt(n))
    estimate = 0.0
    stable = 0
    restarts = 0
    for _ in range(max_iter):
        w = a @ v
        lam = float(w @ w)  # = v^T (A^T A) v since v is unit-norm
        if lam == 0.0:
            restarts += 1
            if restarts > 3:
                raise PowerIterationError(
                    "power iteration start vectors all annihilated", estimate, v
                )
            v = substream(0x5EED, restarts).standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        new_estimate = math.sqrt(lam)
        if estimate > 0.0 and abs(new_estimate - estimate) <= tol * new_estimate:
            stable += 1
            if stable >= 2:
                return new_estimate
        else:
            stable = 0
        estimate = new_estimate
        v = a.T @ w
        v /= np.linalg.norm(v)
    raise PowerIterationError(
        f"power iteration did not converge in {max_iter} iterations", estimate, v
    )


def stable_rank(c: DenseMatrix, tol: float = 1e-9, max_iter: int = 5000) -> float:
    """Squared Frobenius norm over squared spectral norm; at least 1 for nonzero input.

    ``tol`` and ``max_iter`` control the spectral-norm power iteration;
    spectra with many near-top singular values may need a looser tolerance
    or more iterations.
    """
    f = frobenius_norm(c)
    if f == 0.0:
        raise ZeroMatrixError("stable rank is undefined for the zero matrix")
    s = spectral_norm(c, tol=tol, max_iter=max_iter)
    return (f / s) ** 2


def reduced_qr(x: DenseMatrix, rank_tol: float = 1e-10) -> tuple[DenseMatrix, DenseMatrix]:
    """Reduced QR factorization with the R diagonal forced nonnegative.

    Householder-based (LAPACK), so Q is deterministic once the diagonal sign
    convention is applied. Requires rows >= cols and numerically full column
    rank; a diagonal entry of R at or below ``rank_tol`` times the largest
    one raises RankDeficiencyError.
    """
    if x.rows < x.cols:
        raise ValueError(f"need rows >= cols, got {x.rows}x{x.cols}")
    q, r = np.linalg.qr(x.array, mode="reduced")
    diag = np.abs(np.diag(r))
    threshold = rank_tol * diag.max()
    if (diag <= threshold).any():
        raise RankDeficiencyError(
            f"input is numerically rank deficient (min |R_ii| = {diag.min():.3e})"
        )
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return DenseMatrix._wrap(q * signs), DenseMatrix._wrap(signs[:, None] * r)
