"""Dense complex linear algebra helpers shared by every other module.

Conventions: matrices and vectors are numpy ``complex128`` arrays;
vectorization stacks columns (Fortran order).  All (.)^{-1}(.) expressions
are implemented as solves, never as explicit inverses.
"""

from __future__ import annotations

import numpy as np

# Relative floor on singular values below which a matrix counts as singular.
SINGULARITY_RTOL = 1e-12
# Condition number above which Hermitian solves switch to an SVD pseudo-solve.
PSEUDO_SOLVE_KAPPA = 1e10
HERMITIAN_RTOL = 1e-9


class NotHermitianError(ValueError):
    """Raised when an operation requiring a Hermitian matrix gets a non-Hermitian one."""


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def as_cvector(a) -> np.ndarray:
    """Coerce to a finite 1-D complex128 array."""
    v = np.asarray(a, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def vectorize(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: vec([[1,2],[3,4]]) == [1,3,2,4]."""
    return np.asarray(m, dtype=np.complex128).flatten(order="F")


def unvectorize(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=np.complex128)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, size (rA*rB) x (cA*cB)."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def hermitian_gram(a: np.ndarray) -> np.ndarray:
    """A^dagger A; Hermitian positive semidefinite by construction."""
    a = np.asarray(a, dtype=np.complex128)
    return a.conj().T @ a


def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    scale = np.linalg.norm(m)
    if scale == 0.0:
        return True
    return np.linalg.norm(m - m.conj().T) <= rtol * scale


def condition_number(m: np.ndarray) -> float:
    """2-norm condition number sigma_max/sigma_min.

    Returns ``inf`` when sigma_min <= SINGULARITY_RTOL * sigma_max (singular
    within working precision), so callers never divide by a denormal.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.shape[0] != m.shape[1]:
        raise ValueError("condition_number expects a square matrix")
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= SINGULARITY_RTOL * s[0]:
        return float("inf")
    return float(s[0] / s[-1])


def det_hermitian(m: np.ndarray) -> float:
    """Real determinant of a Hermitian PSD matrix via its eigenvalues.

    Eigenvalues are clamped at zero, so tiny negative rounding noise from a
    numerically computed Gram matrix cannot flip the sign.
    """
    m = np.asarray(m, dtype=np.complex128)
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    w = np.linalg.eigvalsh(m)
    return float(np.prod(np.maximum(w, 0.0)))


def solve_hermitian(m: np.ndarray, rhs: np.ndarray, kappa: float | None = None):
    """Solve M x = rhs for Hermitian M; rhs may be a vector or a matrix.

    Returns ``(x, used_pseudo)``.  When kappa(M) exceeds PSEUDO_SOLVE_KAPPA
    (or M is singular) the solve falls back to an SVD least-squares solution
    and flags it.  A precomputed ``kappa`` skips the internal SVD.
    """
    m = np.asarray(m, dtype=np.complex128)
    rhs = np.asarray(rhs, dtype=np.complex128)
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    if kappa is None:
        kappa = condition_number(m)
    if np.isfinite(kappa) and kappa <= PSEUDO_SOLVE_KAPPA:
        return np.linalg.solve(m, rhs), False
    x, *_ = np.linalg.lstsq(m, rhs, rcond=SINGULARITY_RTOL)
    return x, True
