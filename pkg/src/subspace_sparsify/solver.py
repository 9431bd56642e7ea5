"""Reduced SPD solve, null-space imposition and the one-step KKT solve"""
import logging
from typing import NamedTuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse

from subspace_sparsify.binning import BinAssignment, pattern_values, reduction_map
from subspace_sparsify.core_linalg import UNIT_ROUNDOFF, as_dense
from subspace_sparsify.errors import InvalidArgumentError, SingularSystemError, SizeGuardError
from subspace_sparsify.misfit import MAX_DENSE_HESSIAN_NNZ, ReducedSystem, build_misfit, pattern_hessian
from subspace_sparsify.pattern import SparsityPattern

_logger = logging.getLogger(__name__)

RIDGE_FACTOR = 1e-12
DEFAULT_CG_TOL = 1e-12


class SpdSolution(NamedTuple):
    y: np.ndarray
    ridge_used: bool = False
    ridge: float = 0.0


class NullspaceSolution(NamedTuple):
    x: scipy.sparse.csr_matrix
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True


def csr_on_pattern(pattern: SparsityPattern, values) -> scipy.sparse.csr_matrix:
    """CSR matrix holding ``values`` at the pattern positions, zeros stored explicitly"""
    values = np.asarray(values)
    if values.shape != (pattern.nnz,):
        raise InvalidArgumentError(f"expected {pattern.nnz} values, got {values.shape}")
    indptr = np.zeros(pattern.num_rows + 1, dtype=np.int64)
    if pattern.nnz:
        np.cumsum(np.bincount(pattern.rows, minlength=pattern.num_rows), out=indptr[1:])
    return scipy.sparse.csr_matrix((values, pattern.cols.astype(np.int64), indptr), shape=pattern.shape)


class ConstraintOperator(NamedTuple):
    """``C x = [vec(X right_null); vec(left_null^* X)]`` for X supported on the pattern"""

    pattern: SparsityPattern
    right_null: np.ndarray
    left_null: np.ndarray

    @property
    def n_constraints(self) -> int:
        num_rows, num_cols = self.pattern.shape
        return num_rows * self.right_null.shape[1] + self.left_null.shape[1] * num_cols

    @property
    def dtype(self):
        return np.result_type(self.right_null.dtype, self.left_null.dtype)

    def apply(self, values) -> np.ndarray:
        values = np.asarray(values)
        x = csr_on_pattern(self.pattern, values)
        right = x @ self.right_null
        left = (x.conj().T @ self.left_null).conj().T
        return np.concatenate([np.asarray(right).ravel(), np.asarray(left).ravel()])

    def adjoint(self, multipliers) -> np.ndarray:
        num_rows, num_cols = self.pattern.shape
        n_right = num_rows * self.right_null.shape[1]
        lam_right = np.asarray(multipliers[:n_right]).reshape(num_rows, self.right_null.shape[1])
        lam_left = np.asarray(multipliers[n_right:]).reshape(self.left_null.shape[1], num_cols)
        rows, cols = self.pattern.rows, self.pattern.cols
        return np.einsum("pc,pc->p", lam_right[rows], self.right_null[cols].conj()) + np.einsum(
            "pc,cp->p", self.left_null[rows], lam_left[:, cols]
        )

    def to_dense(self, real_form: bool = True) -> np.ndarray:
        """The explicit ``n_constraints x nnz`` matrix (real form doubles both sizes for complex bases)"""
        num_rows, num_cols = self.pattern.shape
        n_right_cols = self.right_null.shape[1]
        rows, cols = self.pattern.rows, self.pattern.cols
        entries = np.arange(self.pattern.nnz)
        res = np.zeros((self.n_constraints, self.pattern.nnz), dtype=self.dtype)
        for c in range(n_right_cols):
            res[rows * n_right_cols + c, entries] = self.right_null[cols, c]
        offset = num_rows * n_right_cols
        for c in range(self.left_null.shape[1]):
            res[offset + c * num_cols + cols, entries] = self.left_null[rows, c].conj()
        if real_form and np.iscomplexobj(res):
            res = np.block([[res.real, -res.imag], [res.imag, res.real]])
        return res


def _cholesky(hessian: np.ndarray):
    chol = scipy.linalg.cho_factor(hessian, lower=True)
    pivots = np.abs(np.diag(chol[0])) ** 2
    if pivots.min() <= hessian.shape[0] * UNIT_ROUNDOFF * np.abs(np.diag(hessian)).max():
        raise np.linalg.LinAlgError("non-positive pivot")
    return chol


def solve_spd(system: ReducedSystem) -> SpdSolution:
    """Cholesky solve, retried once with a ridge of ``1e-12 trace(H) / n``"""
    hessian, rhs = system.hessian, system.rhs
    size = rhs.size
    if size == 0:
        return SpdSolution(np.zeros(0, dtype=np.float64))
    try:
        return SpdSolution(scipy.linalg.cho_solve(_cholesky(hessian), rhs))
    except np.linalg.LinAlgError:
        pass
    ridge = RIDGE_FACTOR * np.trace(hessian) / size
    if not ridge > 0:
        raise SingularSystemError("reduced Hessian has no positive diagonal")
    _logger.warning("reduced Hessian (%d bins) is numerically singular, retrying with ridge %.3e", size, ridge)
    try:
        chol = _cholesky(hessian + ridge * np.eye(size))
    except np.linalg.LinAlgError as chol_err:
        raise SingularSystemError(f"Cholesky failed on the {size}x{size} reduced Hessian after ridge") from chol_err
    return SpdSolution(scipy.linalg.cho_solve(chol, rhs), ridge_used=True, ridge=float(ridge))


def expand_bins(y, bins: BinAssignment) -> scipy.sparse.csr_matrix:
    """Give every pattern position the value of its bin"""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (bins.n_bins,):
        raise InvalidArgumentError(f"y has shape {y.shape}, expected ({bins.n_bins},)")
    parts = y[reduction_map(bins)]
    nnz = bins.pattern.nnz
    values = parts[:nnz] + 1j * parts[nnz:] if bins.is_complex else parts
    return csr_on_pattern(bins.pattern, values)


def impose_nullspaces(
    y, constraints: ConstraintOperator, tol: float = DEFAULT_CG_TOL, max_iter: Union[int, None] = None
) -> NullspaceSolution:
    """Frobenius-nearest matrix to ``y`` on the pattern with ``X right_null = 0`` and ``left_null^* X = 0``

    Conjugate gradients on ``(C C^*) lambda = C y``, then ``x = y - C^* lambda``.
    """
    values = pattern_values(y, constraints.pattern)
    if constraints.n_constraints == 0 or not values.size:
        return NullspaceSolution(csr_on_pattern(constraints.pattern, values))
    rhs = constraints.apply(values)
    scale = max(np.linalg.norm(rhs), np.linalg.norm(values))
    if max_iter is None:
        max_iter = constraints.n_constraints
    multipliers = np.zeros(rhs.shape, dtype=np.result_type(rhs.dtype, values.dtype))
    residual = rhs.copy()
    direction = residual.copy()
    res_norm2 = np.vdot(residual, residual).real
    iterations = 0
    while np.sqrt(res_norm2) > tol * scale and iterations < max_iter:
        applied = constraints.apply(constraints.adjoint(direction))
        curvature = np.vdot(direction, applied).real
        if curvature <= 0:
            break
        step = res_norm2 / curvature
        multipliers += step * direction
        residual -= step * applied
        new_norm2 = np.vdot(residual, residual).real
        direction = residual + (new_norm2 / res_norm2) * direction
        res_norm2 = new_norm2
        iterations += 1
    relative = float(np.sqrt(res_norm2) / scale) if scale else 0.0
    converged = relative <= tol
    if not converged:
        _logger.warning(
            "null-space CG stopped after %d iterations at relative residual %.3e (tol %.1e)",
            iterations,
            relative,
            tol,
        )
    x = values - constraints.adjoint(multipliers)
    return NullspaceSolution(csr_on_pattern(constraints.pattern, x), iterations, relative, converged)


def solve_exact(a, pinv, pattern: SparsityPattern, right_null, left_null) -> scipy.sparse.csr_matrix:
    """Minimize J over the pattern subject to the null-space constraints with one dense KKT solve"""
    if pattern.nnz > MAX_DENSE_HESSIAN_NNZ:
        raise SizeGuardError(
            f"exact solve refused for {pattern.nnz} pattern entries (limit {MAX_DENSE_HESSIAN_NNZ}); "
            "use the binned two-step solve instead"
        )
    a = as_dense(a)
    mis = build_misfit(a, pinv)
    is_complex = np.iscomplexobj(a)
    if not pattern.nnz:
        return csr_on_pattern(pattern, np.zeros(0, dtype=a.dtype))
    hessian = pattern_hessian(mis, pattern, real_form=True)
    lin = mis.linear_term[pattern.rows, pattern.cols]
    rhs = np.concatenate([lin.real, lin.imag]) if is_complex else lin.real
    constraints = ConstraintOperator(pattern, np.asarray(right_null), np.asarray(left_null)).to_dense(real_form=False)
    if is_complex:
        constraints = np.block([[constraints.real, -constraints.imag], [constraints.imag, constraints.real]])
    elif np.iscomplexobj(constraints):
        # real unknowns: each complex equation splits into two real ones
        constraints = np.vstack([constraints.real, constraints.imag])
    n_vars = rhs.size
    n_cons = constraints.shape[0]
    kkt = np.block([[hessian, constraints.T], [constraints, np.zeros((n_cons, n_cons))]])
    sol = scipy.linalg.lstsq(kkt, np.concatenate([rhs, np.zeros(n_cons)]), lapack_driver="gelsy")[0]
    parts = sol[:n_vars]
    values = parts[: pattern.nnz] + 1j * parts[pattern.nnz :] if is_complex else parts
    _logger.debug("exact KKT solve: %d unknowns, %d constraints", n_vars, n_cons)
    return csr_on_pattern(pattern, values)
