"""Dense Hermitian linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. All routines are
pure; inputs are never modified.

Thresholds are relative: an eigenvalue counts as negative when it is below
``-psd_tol * (1 + ||M||_2)`` and as zero when its modulus is at most
``kernel_tol * (1 + ||M||_2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class DimensionError(ValueError):
    """Operands have inconsistent shapes."""


class NotPSDError(ValueError):
    """A matrix required to be positive semidefinite has a negative eigenvalue."""


class KernelConditionError(ValueError):
    """A kernel inclusion required as a precondition does not hold."""


class ToleranceDisagreement(RuntimeError):
    """Mathematically equivalent tests disagree by more than the tolerance allows."""


@dataclass(frozen=True)
class ToleranceConfig:
    psd_tol: float = 1e-9
    kernel_tol: float = 1e-10
    duality_tol: float = 1e-8
    hermitian_tol: float = 1e-8

    def __post_init__(self):
        for name in ("psd_tol", "kernel_tol", "duality_tol", "hermitian_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = ToleranceConfig()


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # orthonormal columns

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_square(M, name: str = "matrix") -> np.ndarray:
    A = as_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    return A


def opnorm(M) -> float:
    """Spectral norm (largest singular value)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def dagger(M) -> np.ndarray:
    return np.asarray(M).conj().T


def hermitize(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Return ``(M + M*)/2`` after checking that ``M`` is Hermitian up to roundoff."""
    A = as_square(M)
    skew = np.linalg.norm(A - A.conj().T)
    if skew > tol.hermitian_tol * (1.0 + np.linalg.norm(A)):
        raise ValueError(f"matrix is not Hermitian (||M - M*||_F = {skew:.3e})")
    return 0.5 * (A + A.conj().T)


def hermitian_eig(M, tol: ToleranceConfig = DEFAULT_TOL) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix, eigenvalues in descending order."""
    H = hermitize(M, tol)
    w, V = np.linalg.eigh(H)
    return SpectralDecomposition(w[::-1].copy(), V[:, ::-1].copy())


def min_eig(M, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of a Hermitian matrix and a unit eigenvector for it."""
    w, V = np.linalg.eigh(hermitize(M, tol))
    return float(w[0]), V[:, 0].copy()


def psd_threshold(M, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    return tol.psd_tol * (1.0 + opnorm(M))


def kernel_threshold(M, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    return tol.kernel_tol * (1.0 + opnorm(M))


def is_psd(M, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    lam, _ = min_eig(M, tol)
    return lam >= -psd_threshold(M, tol)


def is_pd(M, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Positive definite: every eigenvalue above the kernel threshold."""
    lam, _ = min_eig(M, tol)
    return lam > kernel_threshold(M, tol)


def _checked_psd_eig(M, tol: ToleranceConfig) -> SpectralDecomposition:
    dec = hermitian_eig(M, tol)
    if dec.eigenvalues.size and dec.eigenvalues[-1] < -psd_threshold(M, tol):
        raise NotPSDError(
            f"matrix is not positive semidefinite (min eigenvalue {dec.eigenvalues[-1]:.3e})"
        )
    return dec


def psd_function(M, fn, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Apply ``fn`` to the eigenvalues of a PSD matrix above the kernel threshold.

    Eigenvalues at or below the threshold are mapped to zero, which gives
    pseudoinverse semantics for negative powers.
    """
    w, V = _checked_psd_eig(M, tol)
    keep = w > kernel_threshold(M, tol)
    vals = np.zeros_like(w)
    vals[keep] = fn(w[keep])
    return (V * vals) @ V.conj().T


def pinv_psd(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a PSD matrix."""
    return psd_function(M, lambda w: 1.0 / w, tol)


def psd_power(M, p: float, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``M**p`` on the support of ``M``; zero on the kernel (also for ``p <= 0``)."""
    return psd_function(M, lambda w: w**p, tol)


def psd_sqrt(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    return psd_function(M, np.sqrt, tol)


def range_projector(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    return psd_function(M, np.ones_like, tol)


def kernel_basis(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical kernel of a PSD matrix.

    Returns an array of shape ``(dim, 0)`` for positive definite input.
    """
    w, V = hermitian_eig(M, tol)
    return V[:, np.abs(w) <= kernel_threshold(M, tol)]


def kernel_included(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Whether ``ker(A) ⊆ ker(B)`` for PSD ``A``.

    ``B`` acts on the same space as ``A`` (``B.shape[1] == A.shape[0]``).
    Pass ``K.conj().T`` to test ``ker(X) ⊆ ker(K*)``.
    """
    A = as_square(A, "A")
    B = as_matrix(B, "B")
    if B.shape[1] != A.shape[0]:
        raise DimensionError(f"B has {B.shape[1]} columns, A acts on dimension {A.shape[0]}")
    ker = kernel_basis(A, tol)
    if ker.shape[1] == 0:
        return True
    residual = np.linalg.norm(B @ ker, axis=0).max()
    return bool(residual <= kernel_threshold(B, tol))


@dataclass(frozen=True)
class SchurReport:
    block_psd: bool
    via_y: bool  # ker(Y) ⊆ ker(K*) and X >= K* Y^+ K
    via_x: bool  # ker(X) ⊆ ker(K) and Y >= K X^+ K*
    block_min_eig: float
    schur_y_min_eig: float
    schur_x_min_eig: float
    kernel_y_ok: bool
    kernel_x_ok: bool

    @property
    def agree(self) -> bool:
        return self.block_psd == self.via_y == self.via_x

    @property
    def verdict(self) -> bool:
        return self.block_psd


def schur_block_psd(X, Y, K, tol: ToleranceConfig = DEFAULT_TOL) -> SchurReport:
    """Evaluate the three equivalent positivity tests for ``[[X, K*], [K, Y]]``.

    ``X`` acts on H, ``Y`` on H', and ``K`` maps H to H' (shape ``dim H' x dim H``).
    Raises ToleranceDisagreement if one test fails by a wide margin while
    another passes.
    """
    X = hermitize(X, tol)
    Y = hermitize(Y, tol)
    K = as_matrix(K, "K")
    if K.shape != (Y.shape[0], X.shape[0]):
        raise DimensionError(f"K has shape {K.shape}, expected {(Y.shape[0], X.shape[0])}")
    Kd = K.conj().T
    block = np.block([[X, Kd], [K, Y]])
    block_min, _ = min_eig(block, tol)
    block_ok = block_min >= -psd_threshold(block, tol)

    ker_y = kernel_included(Y, Kd, tol)
    SY = X - Kd @ pinv_psd(Y, tol) @ K
    sy_min, _ = min_eig(SY, tol)
    via_y = ker_y and sy_min >= -psd_threshold(SY, tol)

    ker_x = kernel_included(X, K, tol)
    SX = Y - K @ pinv_psd(X, tol) @ Kd
    sx_min, _ = min_eig(SX, tol)
    via_x = ker_x and sx_min >= -psd_threshold(SX, tol)

    report = SchurReport(
        block_ok, via_y, via_x, block_min, sy_min, sx_min, ker_y, ker_x
    )
    if not report.agree:
        # only a disagreement far from the tolerance boundary signals a bug
        wide = np.sqrt(tol.psd_tol)
        margins = [
            block_min / (1 + opnorm(block)),
            sy_min / (1 + opnorm(SY)) if ker_y else -np.inf,
            sx_min / (1 + opnorm(SX)) if ker_x else -np.inf,
        ]
        verdicts = [block_ok, via_y, via_x]
        if any(v for v in verdicts) and any(m < -wide for m in margins):
            raise ToleranceDisagreement(f"Schur complement tests disagree: {report}")
    return report


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A, "A"), as_matrix(B, "B"))


def partial_trace_first(M, n: int, m: int) -> np.ndarray:
    """Trace out the first factor of an operator on C^n ⊗ C^m."""
    M = as_matrix(M)
    if M.shape != (n * m, n * m):
        raise DimensionError(f"expected shape {(n * m, n * m)}, got {M.shape}")
    return np.einsum("iaib->ab", M.reshape(n, m, n, m))


def vec(A) -> np.ndarray:
    """Column-stacking vectorization: ``vec(A)[i + rows*j] = A[i, j]``."""
    return np.asarray(A).reshape(-1, order="F")


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return np.asarray(v).reshape(rows, cols, order="F")


def ket(v) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(-1, 1)


def outer(u, v) -> np.ndarray:
    """``|u><v|``."""
    return np.outer(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex).conj())


def basis_matrix(i: int, j: int, n: int) -> np.ndarray:
    E = np.zeros((n, n), dtype=complex)
    E[i, j] = 1.0
    return E
