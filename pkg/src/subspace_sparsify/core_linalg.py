"""Dense linear algebra kernels

Column-pivoted QR (LAPACK xGEQP3 through scipy), numerical rank, the
Moore-Penrose pseudoinverse built from the QR factors and orthonormal bases
of the left and right null-spaces. The SVD is only used for diagnostics.
"""
import logging
from typing import NamedTuple, Union

import numpy as np
import scipy.linalg

from subspace_sparsify.errors import InvalidArgumentError, RankInconsistencyError

_logger = logging.getLogger(__name__)

UNIT_ROUNDOFF = np.finfo(np.float64).eps


class QrPinvFactorization(NamedTuple):
    """``a[:, perm] == q @ r`` plus everything derived from it

    Only ``q``, ``r`` and ``perm`` are set by ``pivoted_qr``; ``factorize`` fills the rest.
    """

    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray
    rank: Union[int, None] = None
    rank_tol: Union[float, None] = None
    pinv: Union[np.ndarray, None] = None
    left_null: Union[np.ndarray, None] = None
    right_null: Union[np.ndarray, None] = None

    @property
    def shape(self):
        return self.q.shape[0], self.r.shape[1]

    @property
    def r11(self):
        return self.r[: self.rank, : self.rank]

    @property
    def r12(self):
        return self.r[: self.rank, self.rank :]

    @property
    def is_rank_deficient(self):
        """True when a left or right null-space exists"""
        num_rows, num_cols = self.shape
        return self.rank < num_rows or self.rank < num_cols


def as_dense(a, name: str = "a") -> np.ndarray:
    """Validate ``a`` as a finite, non-empty 2-D matrix and return a float64/complex128 copy"""
    arr = np.array(a, copy=True)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"`{name}` must be a 2-D matrix, got {arr.ndim} dimension(s)")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidArgumentError(f"`{name}` has a zero dimension {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128)
    else:
        try:
            arr = arr.astype(np.float64)
        except (TypeError, ValueError) as conv_err:
            raise InvalidArgumentError(f"`{name}` is not numeric: {conv_err}") from conv_err
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"`{name}` contains NaN or Inf values")
    return arr


def dense_from_columns(num_rows: int, num_cols: int, values, leading_dim: int) -> np.ndarray:
    """Build a dense matrix from column-oriented storage with a leading dimension (BLAS/LAPACK layout)"""
    if num_rows < 1 or num_cols < 1:
        raise InvalidArgumentError(f"num_rows and num_cols must be >= 1, got {num_rows}x{num_cols}")
    if leading_dim < num_rows:
        raise InvalidArgumentError(f"leading_dim {leading_dim} must be >= num_rows {num_rows}")
    flat = np.asarray(values).ravel()
    if flat.size < leading_dim * (num_cols - 1) + num_rows:
        raise InvalidArgumentError(
            f"values holds {flat.size} scalars, too few for {num_rows}x{num_cols}/{leading_dim}"
        )
    padded = np.zeros(leading_dim * num_cols, dtype=flat.dtype)
    stop = min(flat.size, padded.size)
    padded[:stop] = flat[:stop]
    return as_dense(padded.reshape((leading_dim, num_cols), order="F")[:num_rows, :], name="values")


def pivoted_qr(a) -> QrPinvFactorization:
    """Householder QR with greedy column pivoting: ``a[:, perm] == q @ r``

    LAPACK picks the first column of maximal remaining norm, so ties go to the lowest index.
    """
    a = as_dense(a)
    q, r, perm = scipy.linalg.qr(a, mode="full", pivoting=True)
    return QrPinvFactorization(q=q, r=r, perm=np.asarray(perm, dtype=np.intp))


def numerical_rank(r_diag, m: int, n: int, rank_tol: Union[float, None] = None):
    """Return ``(rank, rank_tol)`` from the diagonal of a pivoted R"""
    mags = np.abs(np.asarray(r_diag))
    if rank_tol is None:
        rank_tol = max(m, n) * UNIT_ROUNDOFF * mags[0] if mags.size else 0.0
    elif rank_tol < 0:
        raise InvalidArgumentError(f"rank_tol must be nonnegative, got {rank_tol}")
    rank = int(np.count_nonzero(mags > rank_tol))
    return rank, float(rank_tol)


def _apply_perm(perm, rows_in_pivot_order):
    """Compute ``P @ M`` where ``P e_k = e_perm[k]``"""
    res = np.empty_like(rows_in_pivot_order)
    res[perm] = rows_in_pivot_order
    return res


def pseudoinverse_from_qr(f: QrPinvFactorization) -> np.ndarray:
    """``A^+ = P [R11 R12]^+ Q1^*``

    The trapezoidal block ``T = [R11 R12]`` is inverted as ``T^* (T T^*)^-1`` through the
    Cholesky factor of ``T T^*``; with full column rank it is a plain triangular solve.
    """
    num_rows, num_cols = f.shape
    rank = f.rank
    dtype = np.result_type(f.q.dtype, f.r.dtype)
    if rank == 0:
        return np.zeros((num_cols, num_rows), dtype=dtype)
    q1_h = f.q[:, :rank].conj().T
    if rank == num_cols:
        pinv_perm = scipy.linalg.solve_triangular(f.r11, q1_h, lower=False)
    else:
        trap = f.r[:rank, :]
        gram = trap @ trap.conj().T
        try:
            chol = scipy.linalg.cho_factor(gram, lower=True)
        except np.linalg.LinAlgError as chol_err:
            raise RankInconsistencyError(
                f"Cholesky of T T^* broke down at rank {rank}; rank_tol {f.rank_tol:.3e} is inconsistent"
            ) from chol_err
        pinv_perm = trap.conj().T @ scipy.linalg.cho_solve(chol, q1_h)
    return _apply_perm(f.perm, pinv_perm)


def left_nullspace_basis(f: QrPinvFactorization) -> np.ndarray:
    """Last ``m - r`` columns of Q: orthonormal, ``A^* basis == 0``"""
    return np.array(f.q[:, f.rank :])


def right_nullspace_basis(f: QrPinvFactorization) -> np.ndarray:
    """Orthonormalized ``P [-R11^-1 R12; I]``"""
    num_cols = f.shape[1]
    rank = f.rank
    nullity = num_cols - rank
    dtype = np.result_type(f.q.dtype, f.r.dtype)
    if nullity == 0:
        return np.zeros((num_cols, 0), dtype=dtype)
    top = -scipy.linalg.solve_triangular(f.r11, f.r12, lower=False) if rank else np.zeros((0, nullity), dtype=dtype)
    basis = np.vstack([top, np.eye(nullity, dtype=dtype)])
    return orthonormalize(_apply_perm(f.perm, basis))


def orthonormalize(cols) -> np.ndarray:
    """Two-pass modified Gram-Schmidt

    Each column is signed so that its first nonzero component is positive real.
    """
    basis = np.array(cols, dtype=np.result_type(np.asarray(cols).dtype, np.float64), copy=True)
    if basis.ndim != 2:
        raise InvalidArgumentError("orthonormalize expects a 2-D matrix")
    for k in range(basis.shape[1]):
        vec = basis[:, k]
        original = np.linalg.norm(vec)
        for _ in range(2):
            for j in range(k):
                vec -= np.vdot(basis[:, j], vec) * basis[:, j]
        norm = np.linalg.norm(vec)
        if original == 0 or norm <= 1e3 * UNIT_ROUNDOFF * original:
            raise RankInconsistencyError(f"column {k} is linearly dependent on the previous ones")
        vec /= norm
        lead = np.flatnonzero(np.abs(vec) > 1e-12)
        if lead.size:
            phase = vec[lead[0]] / abs(vec[lead[0]])
            vec *= np.conj(phase)
            if np.iscomplexobj(vec):
                vec[lead[0]] = abs(vec[lead[0]])
        basis[:, k] = vec
    return basis


def factorize(a, rank_tol: Union[float, None] = None, null_spaces: bool = True) -> QrPinvFactorization:
    """Pivoted QR, numerical rank, pseudoinverse and (optionally) both null-space bases"""
    fact = pivoted_qr(a)
    num_rows, num_cols = fact.shape
    rank, tol = numerical_rank(np.diag(fact.r), num_rows, num_cols, rank_tol=rank_tol)
    fact = fact._replace(rank=rank, rank_tol=tol)
    fact = fact._replace(pinv=pseudoinverse_from_qr(fact))
    if null_spaces:
        fact = fact._replace(left_null=left_nullspace_basis(fact), right_null=right_nullspace_basis(fact))
    _logger.debug("factorized %dx%d matrix: rank %d (tol %.3e)", num_rows, num_cols, rank, tol)
    return fact


def condition_number(a, rank: Union[int, None] = None) -> float:
    """``sigma_1 / sigma_rank`` from a dense SVD; +inf when ``sigma_rank`` is zero"""
    arr = np.asarray(a)
    if rank is None:
        rank = min(arr.shape)
    if not 1 <= rank <= min(arr.shape):
        raise InvalidArgumentError(f"rank {rank} is outside [1, {min(arr.shape)}]")
    sigma = scipy.linalg.svdvals(arr)
    if sigma[rank - 1] == 0:
        return float("inf")
    return float(sigma[0] / sigma[rank - 1])
