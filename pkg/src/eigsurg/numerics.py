"""Dense real/complex matrix kernel backing the synthesis pipeline.

Thin wrappers around LAPACK (through ``numpy.linalg``) with explicit,
tolerance-aware contracts: every rank decision uses a relative
singular-value cutoff, and degenerate inputs raise typed errors instead of
silently returning garbage.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, KernelError, RankDeficient, Singular


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across the pipeline.

    Attributes
    ----------
    rank_rel : float
        Relative singular-value cutoff for rank decisions:
        sigma_k is counted iff sigma_k > rank_rel * sigma_max.
    residual_abs : float
        Absolute residual bound; scaled by operator norms where noted.
    match_abs : float
        Eigenvalue pairing distance bound.
    """

    rank_rel: float = 1e-9
    residual_abs: float = 1e-7
    match_abs: float = 1e-6

    def __post_init__(self):
        for name in ("rank_rel", "residual_abs", "match_abs"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")


_DEFAULT_TOL = Tolerances()


def as_real_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate ``M`` as a finite real 2-D array and return a float64 copy."""
    if np.iscomplexobj(M):
        raise ValueError(f"{name} must be real")
    A = np.array(M, dtype=float, copy=True)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def as_complex_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate ``M`` as a finite 2-D array and return a complex128 copy."""
    A = np.array(M, dtype=complex, copy=True)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got ndim={A.ndim}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def singular_values(M) -> np.ndarray:
    """Singular values of ``M`` in descending order (empty for 0-sized input)."""
    A = np.atleast_2d(np.asarray(M))
    if min(A.shape) == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as err:
        raise KernelError(f"SVD did not converge: {err}") from err


def rank(M, tol: Tolerances = _DEFAULT_TOL) -> int:
    """Numerical rank: number of singular values above rank_rel * sigma_max.

    The zero matrix (and any 0-sized matrix) has rank 0.
    """
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel * s[0]))


def nullspace_basis(M, tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the right null space of ``M`` at the rank cutoff.

    Returns a ``(cols(M), k)`` array whose columns satisfy ``M @ N ~ 0`` and
    ``N^H N = I``; ``k`` is zero when ``M`` has full column rank. The result
    is real whenever ``M`` is real.
    """
    A = np.atleast_2d(np.asarray(M))
    if A.shape[1] == 0:
        return np.zeros((0, 0), dtype=A.dtype)
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=A.dtype)
    try:
        _, s, vh = np.linalg.svd(A)
    except np.linalg.LinAlgError as err:
        raise KernelError(f"SVD did not converge: {err}") from err
    if s.size == 0 or s[0] == 0.0:
        k = 0
    else:
        k = int(np.count_nonzero(s > tol.rank_rel * s[0]))
    return vh[k:].conj().T


def min_norm_right_solve(V, Z, tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    """Minimum-Frobenius-norm ``X`` with ``X @ V = Z``, via the pseudoinverse.

    Parameters
    ----------
    V : (n, r) real array with full column rank at the cutoff.
    Z : (m, r) real array.

    Raises
    ------
    RankDeficient
        If the columns of V are dependent at the rank cutoff (which also
        covers r > n).
    """
    Vm = np.atleast_2d(np.asarray(V, dtype=float))
    Zm = np.atleast_2d(np.asarray(Z, dtype=float))
    n, r = Vm.shape
    m, rz = Zm.shape
    if rz != r:
        raise DimensionMismatch(f"V has {r} columns but Z has {rz}")
    if r == 0:
        return np.zeros((m, n))
    if rank(Vm, tol) < r:
        raise RankDeficient(f"columns of V are dependent at cutoff {tol.rank_rel:g}")
    return Zm @ np.linalg.pinv(Vm, rcond=tol.rank_rel)


def min_norm_solve(A, b, tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    """Minimum-norm least-squares solution of ``A @ x = b`` for a vector b."""
    try:
        x, *_ = np.linalg.lstsq(np.atleast_2d(A), np.asarray(b), rcond=tol.rank_rel)
    except np.linalg.LinAlgError as err:
        raise KernelError(f"least-squares solve failed: {err}") from err
    return x


def eig(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and unit-norm right eigenvectors of a square matrix.

    Real input yields eigenvalues in conjugate pairs (adjacent, positive
    imaginary part first, as LAPACK emits them). For defective matrices the
    returned vectors may be numerically dependent; callers must not assume
    diagonalizability.
    """
    A = np.atleast_2d(np.asarray(M))
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {A.shape}")
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as err:
        raise KernelError(f"eigendecomposition did not converge: {err}") from err
    return w, V


def orthonormal_completion(V, tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the orthogonal complement of range(V).

    ``V`` is (n, r) with full column rank and r < n; the result C is
    (n, n - r) with ``V^T C ~ 0`` and ``C^T C = I``, so [V | C] is invertible.
    An empty V (r = 0) completes to the identity.
    """
    Vm = np.atleast_2d(np.asarray(V, dtype=float))
    n, r = Vm.shape
    if r >= n:
        raise ValueError(f"nothing to complete: V has {r} columns in dimension {n}")
    if r == 0:
        return np.eye(n)
    if rank(Vm, tol) < r:
        raise RankDeficient("columns of V are dependent; completion undefined")
    U, _, _ = np.linalg.svd(Vm)
    return U[:, r:]


def invert(M, tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    """Inverse of a square matrix; raises Singular at the rank cutoff."""
    A = np.atleast_2d(np.asarray(M, dtype=float))
    n, nc = A.shape
    if n != nc:
        raise DimensionMismatch(f"matrix must be square, got {A.shape}")
    if rank(A, tol) < n:
        raise Singular(f"matrix is singular at cutoff {tol.rank_rel:g}")
    try:
        return np.linalg.inv(A)
    except np.linalg.LinAlgError as err:  # pragma: no cover - rank check fires first
        raise Singular(str(err)) from err


def condition_number(M) -> float:
    """2-norm condition number (1.0 for 0-sized input)."""
    A = np.atleast_2d(np.asarray(M))
    if min(A.shape) == 0:
        return 1.0
    return float(np.linalg.cond(A))
