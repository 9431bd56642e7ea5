"""The quadratic misfit J(X; A) = 1/2 ||(X - A) A^+||_F^2 + 1/2 ||A^+ (X - A)||_F^2

Expanded, ``J(X) = c + 1/2 <X W_col + W_row X, X> - Re <L, X>`` with
``W_col = A^+ A^+*``, ``W_row = A^+* A^+``, ``L = A W_col + W_row A`` and
``c = 1/2 Re <L, A>``, where ``<U, V> = sum(U * conj(V))``.

Restricted to pattern coordinates the Hessian is the Kronecker sum
``H[(i, j), (k, l)] = d_ik W_col[l, j] + d_jl W_row[i, k]``.
Complex problems are solved over real unknowns: real parts first, then
imaginary parts, with Hessian blocks ``[[Re H, -Im H], [Im H, Re H]]``.
"""
import logging
from typing import NamedTuple, Tuple

import numpy as np
import scipy.sparse

from subspace_sparsify.binning import BinAssignment, pattern_values, reduction_map
from subspace_sparsify.core_linalg import as_dense
from subspace_sparsify.errors import InvalidArgumentError, SizeGuardError
from subspace_sparsify.pattern import SparsityPattern

_logger = logging.getLogger(__name__)

MAX_DENSE_HESSIAN_NNZ = 2000


def _frobenius_inner(u, v) -> complex:
    return np.vdot(v, u)


def _to_dense(x) -> np.ndarray:
    if scipy.sparse.issparse(x):
        return x.toarray()
    return np.asarray(x)


class MisfitOperator(NamedTuple):
    a: np.ndarray
    pinv: np.ndarray
    w_row: np.ndarray
    w_col: np.ndarray
    linear_term: np.ndarray
    constant: float

    @property
    def shape(self):
        return self.a.shape

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.a)

    def apply_hessian(self, x) -> np.ndarray:
        """``X W_col + W_row X``"""
        x = _to_dense(x)
        return x @ self.w_col + self.w_row @ x

    def evaluate(self, x) -> float:
        """J(X; A) through the expansion"""
        x = _to_dense(x)
        if x.shape != self.shape:
            raise InvalidArgumentError(f"X has shape {x.shape}, expected {self.shape}")
        quad = _frobenius_inner(self.apply_hessian(x), x).real
        return float(self.constant + 0.5 * quad - _frobenius_inner(self.linear_term, x).real)


class ReducedSystem(NamedTuple):
    """``1/2 y^T hessian y - rhs^T y + constant`` over the bin unknowns"""

    hessian: np.ndarray
    rhs: np.ndarray
    bins: BinAssignment
    constant: float = 0.0

    @property
    def size(self) -> int:
        return self.rhs.size


def build_misfit(a, pinv) -> MisfitOperator:
    a = as_dense(a)
    pinv = as_dense(pinv, name="pinv")
    num_rows, num_cols = a.shape
    if pinv.shape != (num_cols, num_rows):
        raise InvalidArgumentError(f"pinv has shape {pinv.shape}, expected {(num_cols, num_rows)}")
    pinv_h = pinv.conj().T
    w_col = pinv @ pinv_h
    w_row = pinv_h @ pinv
    # exact Hermitian symmetry of the weights makes the assembled Hessians symmetric
    w_col = 0.5 * (w_col + w_col.conj().T)
    w_row = 0.5 * (w_row + w_row.conj().T)
    linear_term = a @ w_col + w_row @ a
    constant = 0.5 * _frobenius_inner(linear_term, a).real
    return MisfitOperator(a, pinv, w_row, w_col, linear_term, float(constant))


def objective(x, a, pinv) -> float:
    """J(X; A) by the direct formula"""
    x = _to_dense(x)
    a = np.asarray(a)
    pinv = np.asarray(pinv)
    expected = (pinv.shape[1], pinv.shape[0])
    if a.shape != expected:
        raise InvalidArgumentError(f"A has shape {a.shape}, expected {expected} from pinv")
    if x.shape != expected:
        raise InvalidArgumentError(f"X has shape {x.shape}, expected {expected}")
    diff = x - a
    return float(0.5 * np.linalg.norm(diff @ pinv) ** 2 + 0.5 * np.linalg.norm(pinv @ diff) ** 2)


def pattern_hessian_entry(pos1: Tuple[int, int], pos2: Tuple[int, int], mis: MisfitOperator):
    """Second derivative coupling pattern coordinates (i, j) and (k, l), 0-based"""
    i, j = pos1
    k, l = pos2
    res = 0
    if i == k:
        res += mis.w_col[l, j]
    if j == l:
        res += mis.w_row[i, k]
    return res


def _real_form(hess: np.ndarray) -> np.ndarray:
    if not np.iscomplexobj(hess):
        return hess
    return np.block([[hess.real, -hess.imag], [hess.imag, hess.real]])


def pattern_hessian(mis: MisfitOperator, pattern: SparsityPattern, real_form: bool = True) -> np.ndarray:
    """The full pattern Hessian (``nnz x nnz``, or ``2 nnz x 2 nnz`` in real form for complex input)"""
    if pattern.nnz > MAX_DENSE_HESSIAN_NNZ:
        raise SizeGuardError(
            f"pattern has {pattern.nnz} entries; the dense Hessian is limited to {MAX_DENSE_HESSIAN_NNZ}"
        )
    rows, cols = pattern.rows, pattern.cols
    same_row = rows[:, None] == rows[None, :]
    same_col = cols[:, None] == cols[None, :]
    hess = np.where(same_row, mis.w_col[np.ix_(cols, cols)].T, 0) + np.where(
        same_col, mis.w_row[np.ix_(rows, rows)], 0
    )
    if not mis.is_complex:
        hess = hess.real
    return _real_form(hess) if real_form else hess


def gradient(mis: MisfitOperator, pattern: SparsityPattern, values) -> np.ndarray:
    """Gradient of J at the matrix holding ``values`` on the pattern, restricted to the pattern

    For complex input the real and imaginary parts of the result are the partial
    derivatives with respect to the real and imaginary parts of each entry.
    """
    x = np.zeros(pattern.shape, dtype=mis.a.dtype)
    if pattern.nnz:
        x[pattern.rows, pattern.cols] = values
    return pattern_values(mis.apply_hessian(x) - mis.linear_term, pattern)


def _scatter_block(hess, block, row_ids, col_ids, real_ids, imag_ids):
    np.add.at(hess, (real_ids[row_ids][:, None], real_ids[col_ids][None, :]), block.real)
    if imag_ids is None:
        return
    np.add.at(hess, (real_ids[row_ids][:, None], imag_ids[col_ids][None, :]), -block.imag)
    np.add.at(hess, (imag_ids[row_ids][:, None], real_ids[col_ids][None, :]), block.imag)
    np.add.at(hess, (imag_ids[row_ids][:, None], imag_ids[col_ids][None, :]), block.real)


def assemble_reduced(mis: MisfitOperator, bins: BinAssignment) -> ReducedSystem:
    """``E^T H E`` and ``E^T g`` accumulated row by row and column by column

    The pattern Hessian is never formed: entries sharing a row couple through
    ``W_col`` and entries sharing a column couple through ``W_row``.
    """
    pattern = bins.pattern
    if pattern.shape != mis.shape:
        raise InvalidArgumentError(f"bins are for a {pattern.shape} matrix, misfit is {mis.shape}")
    n_bins = bins.n_bins
    hess = np.zeros((n_bins, n_bins), dtype=np.float64)
    rhs = np.zeros(n_bins, dtype=np.float64)
    if not pattern.nnz:
        return ReducedSystem(hess, rhs, bins, mis.constant)
    rows, cols = pattern.rows, pattern.cols
    real_ids = bins.real_ids - 1
    imag_ids = bins.imag_ids - 1 if bins.is_complex else None
    for members in pattern.row_lists():
        if members.size:
            block = mis.w_col[np.ix_(cols[members], cols[members])].T
            _scatter_block(hess, block, members, members, real_ids, imag_ids)
    for members in pattern.col_lists():
        if members.size:
            block = mis.w_row[np.ix_(rows[members], rows[members])]
            _scatter_block(hess, block, members, members, real_ids, imag_ids)
    hess = 0.5 * (hess + hess.T)
    lin = mis.linear_term[rows, cols]
    parts = np.concatenate([lin.real, lin.imag]) if bins.is_complex else lin.real
    np.add.at(rhs, reduction_map(bins), parts)
    _logger.debug("assembled reduced system: %d bins from %d pattern entries", n_bins, pattern.nnz)
    return ReducedSystem(hess, rhs, bins, mis.constant)


def objective_from_bins(system: ReducedSystem, y) -> float:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != system.rhs.shape:
        raise InvalidArgumentError(f"y has {y.size} values, expected {system.size}")
    return float(system.constant + 0.5 * y @ system.hessian @ y - system.rhs @ y)
