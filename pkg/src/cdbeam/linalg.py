"""Public dense symmetric linear algebra built on the jitted kernels.

All matrices are plain float64 numpy arrays; symmetry is validated at the
boundary (``check_symmetric``) rather than carried by a wrapper type.
"""

import numpy as np

from . import _kernels as K

SINGULAR_PIVOT_RTOL = 1e-14
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a factorization meets a pivot below the singularity threshold."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization fails."""


class EigenConvergenceError(np.linalg.LinAlgError):
    """Raised when the Jacobi sweep cap is exhausted."""


def check_symmetric(A, rtol=1e-10, name="matrix"):
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale and np.max(np.abs(A - A.T)) > rtol * scale:
        raise ValueError(f"{name} is not symmetric")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return 0.5 * (A + A.T)


def solve_sym(A, b):
    """Solve A x = b for symmetric (possibly indefinite) A via Bunch-Kaufman LDL^T."""
    A = check_symmetric(A)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.shape[0] != A.shape[0]:
        raise ValueError("right-hand side does not conform")
    L, ipiv, ok = K.ldlt_factor(A)
    scale = np.max(np.abs(A)) if A.size else 0.0
    if not ok:
        raise SingularMatrixError("zero pivot column in LDL^T factorization")
    deigs = K.ldlt_block_eigs(L, ipiv)
    if np.min(np.abs(deigs)) < SINGULAR_PIVOT_RTOL * max(scale, 1e-300):
        raise SingularMatrixError("pivot below singularity threshold")
    if b.ndim == 1:
        return K.ldlt_solve(L, ipiv, b)
    out = np.empty_like(b)
    for j in range(b.shape[1]):
        out[:, j] = K.ldlt_solve(L, ipiv, np.ascontiguousarray(b[:, j]))
    return out


def ldlt(A):
    """Factor once for repeated solves; returns an opaque (L, ipiv, scale) triple."""
    A = check_symmetric(A)
    L, ipiv, ok = K.ldlt_factor(A)
    if not ok:
        raise SingularMatrixError("zero pivot column in LDL^T factorization")
    return L, ipiv, np.max(np.abs(A)) if A.size else 0.0


def ldlt_apply(fac, b):
    L, ipiv, scale = fac
    deigs = K.ldlt_block_eigs(L, ipiv)
    if np.min(np.abs(deigs)) < SINGULAR_PIVOT_RTOL * max(scale, 1e-300):
        raise SingularMatrixError("pivot below singularity threshold")
    return K.ldlt_solve(L, ipiv, np.ascontiguousarray(b, dtype=np.float64))


def inertia(A, tol):
    """(n_pos, n_neg, n_zero) of a symmetric matrix; |value| <= tol counts as zero.

    Uses the LDL^T block-diagonal spectrum, which matches the eigenvalue sign
    counts (Sylvester's law); the zero band is applied to the block eigenvalues.
    """
    A = check_symmetric(A)
    L, ipiv, ok = K.ldlt_factor(A)
    if not ok:
        # an exactly zero column: its pivot is zero, factorization of the rest
        # proceeded; fall back to eigenvalues for a dependable count
        w, _ = eig_sym(A)
        deigs = w
    else:
        deigs = K.ldlt_block_eigs(L, ipiv)
    npos = int(np.sum(deigs > tol))
    nneg = int(np.sum(deigs < -tol))
    return npos, nneg, A.shape[0] - npos - nneg


def eig_sym(A):
    """Full symmetric eigendecomposition (Jacobi): eigenvalues ascending, V columns."""
    A = check_symmetric(A)
    w, V, ok = K.jacobi_eigh(A, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if not ok:
        raise EigenConvergenceError("Jacobi sweeps exhausted")
    return w, V


def eig_inertia(A, tol):
    """Inertia from the eigenvalue spectrum (used where near-zero bands matter)."""
    w, _ = eig_sym(A)
    npos = int(np.sum(w > tol))
    nneg = int(np.sum(w < -tol))
    return npos, nneg, len(w) - npos - nneg


def cholesky(A):
    A = check_symmetric(A)
    L, ok = K.chol_lower(A)
    if not ok:
        raise NotPositiveDefiniteError("matrix is not positive definite")
    return L


def gen_eig_sym_min(A, B):
    """Smallest generalized eigenvalue of A v = lambda B v with B positive definite.

    Equals inf_v (v^T A v)/(v^T B v), computed through the congruence
    C = L^-1 A L^-T with B = L L^T.
    """
    A = check_symmetric(A, name="A")
    B = check_symmetric(B, name="B")
    L = cholesky(B)
    X = K.tri_lower_solve(L, A)
    C = K.tri_lower_solve(L, np.ascontiguousarray(X.T))
    C = 0.5 * (C + C.T)
    w, _ = eig_sym(C)
    return float(w[0])
