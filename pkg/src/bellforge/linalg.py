"""Dense real-symmetric linear algebra primitives shared by every module.

All operators handled by the package are real symmetric, so everything here
is phrased for float64 symmetric matrices.  Tolerance ladder used throughout:
1e-12 for algebraic identities, 1e-10 for decomposition residuals, 1e-9 for
optimization values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError, EigenConvergenceError

# Largest product dimension kron() will materialize densely.
DEFAULT_KRON_CAP = 1 << 14

TOL_ALGEBRA = 1e-12
TOL_DECOMP = 1e-10
TOL_OPT = 1e-9


def check_symmetric(a: np.ndarray, tol: float = 0.0, name: str = "matrix") -> np.ndarray:
    """Return `a` as a float64 array, raising if it is not square symmetric."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.abs(a - a.T) <= tol):
        worst = float(np.max(np.abs(a - a.T)))
        raise ValueError(f"{name} is not symmetric (max asymmetry {worst:.3e})")
    return a


def sym(a: np.ndarray) -> np.ndarray:
    """Symmetrize: the nearest symmetric matrix (A + A^T)/2."""
    a = np.asarray(a, dtype=float)
    return (a + a.T) / 2.0


@dataclass(frozen=True)
class EigDecomposition:
    """Spectral decomposition A = V diag(values) V^T with ascending eigenvalues."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T

    def residuals(self, a: np.ndarray) -> tuple[float, float]:
        """(relative reconstruction residual, orthonormality residual), Frobenius."""
        a = np.asarray(a, dtype=float)
        scale = max(float(np.linalg.norm(a)), 1e-300)
        recon = float(np.linalg.norm(a - self.reconstruct())) / scale
        eye = np.eye(self.vectors.shape[1])
        ortho = float(np.linalg.norm(self.vectors.T @ self.vectors - eye))
        return recon, ortho


def kron(a: np.ndarray, b: np.ndarray, cap: int = DEFAULT_KRON_CAP) -> np.ndarray:
    """Dense Kronecker product with an explicit size guard.

    Raises DimensionCapError when dim(a) * dim(b) would exceed `cap`,
    reporting the size that would have been required.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    required = a.shape[0] * b.shape[0]
    if required > cap:
        raise DimensionCapError(required=required, cap=cap)
    return np.kron(a, b)


def herm_eig(a: np.ndarray, sym_tol: float = 1e-10) -> EigDecomposition:
    """Eigendecomposition of a real symmetric matrix, eigenvalues ascending.

    Backed by LAPACK's guaranteed-convergent symmetric solvers; a convergence
    failure is re-raised as EigenConvergenceError with context.
    """
    a = check_symmetric(a, tol=sym_tol)
    try:
        values, vectors = np.linalg.eigh(sym(a))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise EigenConvergenceError(
            f"symmetric eigensolver did not converge on a {a.shape[0]}x{a.shape[0]} "
            f"matrix with Frobenius norm {np.linalg.norm(a):.3e}: {exc}"
        ) from exc
    return EigDecomposition(values=values, vectors=vectors)


def spectral_norm(a: np.ndarray) -> float:
    """Largest singular value of a (possibly rectangular) real matrix."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0 or not np.any(a):
        return 0.0
    return float(np.linalg.norm(a, 2))


def psd_project(a: np.ndarray, sym_tol: float = 1e-9) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix: eigenvalues clipped at 0."""
    eig = herm_eig(a, sym_tol=sym_tol)
    clipped = np.clip(eig.values, 0.0, None)
    return sym((eig.vectors * clipped) @ eig.vectors.T)


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    a = check_symmetric(a, tol=1e-8)
    return float(np.linalg.eigvalsh(sym(a))[0])
