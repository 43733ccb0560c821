"""
Dense complex matrix decompositions.

Every routine here is deterministic (no randomized pivoting) so repeated
calls on identical input return bit-identical factors.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FactorizationError, RankError

__all__ = ['HermitianEig', 'QrsFactors', 'hermitian_eig', 'hermitian_sqrt',
           'cholesky_upper', 'qrs_equal_diagonal']

# Relative thresholds against the largest eigenvalue / singular value.
PD_RTOL = 1e-12
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class HermitianEig:
    """Spectral factorization ``a = U diag(eigenvalues) U^H``.

    Eigenvalues are sorted non-increasing and column ``i`` of
    ``eigenvectors`` belongs to ``eigenvalues[i]``.
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


@dataclass(frozen=True)
class QrsFactors:
    """Factors of ``a @ s == q @ r`` with an equal-diagonal ``r``."""
    q: np.ndarray
    r: np.ndarray
    s: np.ndarray

    @property
    def diagonal(self):
        return np.real(np.diag(self.r))


def _as_square(a, name='a'):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape "
                             f"{a.shape}")
    return a


def hermitian_eig(a):
    """
    Eigendecomposition of a Hermitian matrix with non-increasing
    eigenvalues.

    The input is symmetrized as ``(a + a^H)/2`` before factorizing.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Hermitian (complex or real) matrix.

    Returns
    -------
    HermitianEig
    """
    a = _as_square(a)
    a = 0.5 * (a + a.conj().T)
    w, U = np.linalg.eigh(a)
    order = np.argsort(-w, kind='stable')
    return HermitianEig(eigenvalues=w[order], eigenvectors=U[:, order])


def hermitian_sqrt(a):
    """Hermitian PSD square root; tiny negative eigenvalues clipped to 0."""
    eig = hermitian_eig(a)
    U = eig.eigenvectors
    root = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    return (U * root) @ U.conj().T


def _find_failing_pivot(a, tol):
    # Plain column Cholesky, only used to name the pivot after numpy fails.
    n = a.shape[0]
    C = np.zeros_like(a, dtype=np.result_type(a, float))
    for j in range(n):
        pivot = np.real(a[j, j] - np.vdot(C[:j, j], C[:j, j]))
        if not pivot > tol:
            return j
        C[j, j] = np.sqrt(pivot)
        C[j, j + 1:] = (a[j, j + 1:] - C[:j, j].conj() @ C[:j, j + 1:]) / C[j, j]
    return None


def cholesky_upper(a):
    """Upper-triangular ``C`` with real positive diagonal and ``C^H C = a``.

    Raises
    ------
    FactorizationError
        If ``a`` is not (numerically) positive definite. The failing pivot
        index is stored on the exception.
    """
    a = _as_square(a)
    a = 0.5 * (a + a.conj().T)
    scale = np.max(np.abs(np.real(np.diag(a)))) if a.size else 0.0
    tol = PD_RTOL * scale
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pivot = _find_failing_pivot(a, tol)
        pivot = 0 if pivot is None else pivot
        raise FactorizationError(
            f"matrix is not positive definite (pivot {pivot})",
            pivot=pivot) from None
    C = L.conj().T
    d2 = np.real(np.diag(C)) ** 2
    bad = np.flatnonzero(~(d2 > tol))
    if scale <= 0 or bad.size:
        pivot = int(bad[0]) if bad.size else 0
        raise FactorizationError(
            f"matrix is numerically singular (pivot {pivot})", pivot=pivot)
    return C


def _givens(x, y):
    """Real rotation G (det +1) with G @ [x, y] = [hypot(x, y), 0]."""
    h = np.hypot(x, y)
    if h == 0.0:
        return np.eye(2)
    c, s = x / h, y / h
    return np.array([[c, s], [-s, c]])


def qrs_equal_diagonal(a):
    """
    Geometric mean decomposition ``a @ s = q @ r``.

    ``r`` is upper triangular and every diagonal entry equals the geometric
    mean of the singular values of ``a``. Starting from the thin SVD, the
    largest and smallest remaining diagonal entries are paired at each step
    and a column rotation followed by a row rotation moves one of them to the
    geometric mean.

    Parameters
    ----------
    a : array_like, shape (m, n), m >= n
        Full column rank matrix.

    Returns
    -------
    QrsFactors
        ``q`` is m x n with orthonormal columns, ``r`` and ``s`` are n x n.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] < a.shape[1] or a.shape[1] == 0:
        raise DimensionError(f"expected a tall or square matrix, got shape "
                             f"{a.shape}")
    a = a.astype(complex)
    m, n = a.shape

    if n == 1 and m == 1:
        mag = abs(a[0, 0])
        if mag == 0:
            raise RankError("matrix is rank deficient (numerical rank 0)",
                            rank=0)
        return QrsFactors(q=a / mag, r=np.array([[mag]], dtype=complex),
                          s=np.ones((1, 1), dtype=complex))

    U, sv, Vh = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0])) if sv[0] > 0 else 0
    if rank < n:
        raise RankError(f"matrix is rank deficient (numerical rank {rank} "
                        f"< {n})", rank=rank)

    target = np.exp(np.mean(np.log(sv)))
    R = np.diag(sv)
    Q = U.copy()
    S = Vh.conj().T.copy()

    for k in range(n - 1):
        tail = np.diag(R)[k:]
        p = k + int(np.argmax(tail))
        q = k + int(np.argmin(tail))
        if q == p:
            # All remaining entries are equal to the geometric mean.
            break
        # Move the largest entry to k and the smallest to k + 1.
        perm = np.array(list(range(k)) + [p, q]
                        + [i for i in range(k, n) if i not in (p, q)])
        R = R[np.ix_(perm, perm)]
        Q = Q[:, perm]
        S = S[:, perm]

        d1, d2 = R[k, k], R[k + 1, k + 1]
        if d1 - d2 <= 0:
            c, s = 1.0, 0.0
        else:
            c2 = (target ** 2 - d2 ** 2) / (d1 ** 2 - d2 ** 2)
            c2 = min(max(c2, 0.0), 1.0)
            c, s = np.sqrt(c2), np.sqrt(1.0 - c2)
        G1 = np.array([[c, -s], [s, c]])
        R[:, k:k + 2] = R[:, k:k + 2] @ G1
        S[:, k:k + 2] = S[:, k:k + 2] @ G1

        G2 = _givens(R[k, k], R[k + 1, k])
        R[k:k + 2, :] = G2 @ R[k:k + 2, :]
        Q[:, k:k + 2] = Q[:, k:k + 2] @ G2.T
        R[k + 1, k] = 0.0

    return QrsFactors(q=Q, r=R.astype(complex), s=S)
