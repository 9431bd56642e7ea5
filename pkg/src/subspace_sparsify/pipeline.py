"""End-to-end sparsification

``sparsify`` / ``sparsify_for_pattern`` run the binned two-step solve:
factorize, pattern, bins, reduced Cholesky solve (the intermediate Y), then
the null-space projection (the output X) when A is rank deficient.
``sparsify_exact`` / ``sparsify_exact_for_pattern`` solve the constrained
problem in one dense step. ``lpn`` is the flat column-major entry point
returning an integer status and a CSR triple.
"""
import logging
import math
from enum import Enum
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse
from colorama import Fore, Style

from subspace_sparsify.binning import compute_bins
from subspace_sparsify.checks_structure import CLAIMED_KINDS, observed_structures, structure_violations
from subspace_sparsify.core_linalg import (
    QrPinvFactorization,
    as_dense,
    condition_number,
    dense_from_columns,
    factorize,
)
from subspace_sparsify.errors import (
    InvalidArgumentError,
    SingularSystemError,
    SizeGuardError,
    SparsifyError,
    StructureError,
)
from subspace_sparsify.misfit import (
    MAX_DENSE_HESSIAN_NNZ,
    MisfitOperator,
    assemble_reduced,
    build_misfit,
    objective,
    pattern_hessian,
)
from subspace_sparsify.pattern import SparsityPattern, lp_pattern, pattern_from_mask
from subspace_sparsify.solver import (
    DEFAULT_CG_TOL,
    ConstraintOperator,
    csr_on_pattern,
    expand_bins,
    impose_nullspaces,
    solve_exact,
    solve_spd,
)
from subspace_sparsify.utils import stage

_logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
INPUT_STRUCTURE_TOL = 1e-12
OUTPUT_STRUCTURE_TOL = 1e-10

STATUS_OK = 0
STATUS_INVALID_ARGUMENT = 1
STATUS_STRUCTURE = 2
STATUS_NUMERICAL = 3
STATUS_SIZE_GUARD = 4


class MatrixType(Enum):
    undefined = -1
    general = 0
    hermitian_pos_def = 1
    hermitian_pos_semi_def = 2
    hermitian = 3
    skew_hermitian = 4
    complex_symmetric = 5

    @classmethod
    def parse(cls, value) -> "MatrixType":
        """Accept a member, its integer value or its name (dashes allowed)"""
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            name = value.strip().lower().replace("-", "_")
            if name in cls.__members__:
                return cls[name]
            raise InvalidArgumentError(f"unknown matrix type `{value}`; expected one of {', '.join(cls.names())}")
        try:
            return cls(value)
        except ValueError as enum_err:
            raise InvalidArgumentError(f"unknown matrix type {value!r}") from enum_err

    @classmethod
    def names(cls) -> List[str]:
        return [member.name for member in cls]

    @property
    def structure(self) -> Union[str, None]:
        """Structure kind claimed by this type, None for undefined/general"""
        if self in (MatrixType.undefined, MatrixType.general):
            return None
        return self.name


class SparsifyConfig(NamedTuple):
    sparsity_ratio: float = 0.8
    sparsity_norm_p: float = 1.0
    max_num_bins: int = 1000
    impose_null_spaces: bool = True
    matrix_type: MatrixType = MatrixType.general
    rank_tol_override: Union[float, None] = None
    cg_tol: float = DEFAULT_CG_TOL


def _is_real_number(value) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, (bool, np.bool_))


def validate_config(cfg: SparsifyConfig) -> SparsifyConfig:
    """Check every field range; returns the config with ``matrix_type`` normalized"""
    if not _is_real_number(cfg.sparsity_ratio) or not 0 <= cfg.sparsity_ratio <= 1:
        raise InvalidArgumentError(f"sparsity_ratio must be in [0, 1], got {cfg.sparsity_ratio!r}")
    if not _is_real_number(cfg.sparsity_norm_p) or not cfg.sparsity_norm_p >= 0:
        raise InvalidArgumentError(f"sparsity_norm_p must be in [0, inf], got {cfg.sparsity_norm_p!r}")
    if not isinstance(cfg.max_num_bins, (int, np.integer)) or isinstance(cfg.max_num_bins, bool):
        raise InvalidArgumentError(f"max_num_bins must be an integer, got {cfg.max_num_bins!r}")
    if cfg.max_num_bins < 0:
        raise InvalidArgumentError(f"max_num_bins must be >= 0, got {cfg.max_num_bins}")
    if not isinstance(cfg.impose_null_spaces, (bool, np.bool_)):
        raise InvalidArgumentError(f"impose_null_spaces must be a boolean, got {cfg.impose_null_spaces!r}")
    if cfg.rank_tol_override is not None and (
        not _is_real_number(cfg.rank_tol_override)
        or not math.isfinite(cfg.rank_tol_override)
        or cfg.rank_tol_override < 0
    ):
        raise InvalidArgumentError(f"rank_tol_override must be a finite value >= 0, got {cfg.rank_tol_override!r}")
    if not _is_real_number(cfg.cg_tol) or not 0 < cfg.cg_tol < 1:
        raise InvalidArgumentError(f"cg_tol must be in (0, 1), got {cfg.cg_tol!r}")
    return cfg._replace(matrix_type=MatrixType.parse(cfg.matrix_type))


def json_float(value):
    """JSON has no Inf/NaN: non-finite values become None"""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class CsrTriple(NamedTuple):
    row_offsets: np.ndarray
    column_ids: np.ndarray
    values: np.ndarray

    @classmethod
    def from_csr(cls, x) -> "CsrTriple":
        x = scipy.sparse.csr_matrix(x)
        x.sort_indices()
        return cls(x.indptr.copy(), x.indices.copy(), x.data.copy())

    def to_csr(self, num_rows: int, num_cols: int) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix((self.values, self.column_ids, self.row_offsets), shape=(num_rows, num_cols))


class SparsifyReport(NamedTuple):
    nnz: int
    n_unknowns: int
    n_bins: int
    rank: int
    ridge_used: bool = False
    ridge: float = 0.0
    cg_iterations: int = 0
    cg_residual: float = 0.0
    cg_converged: bool = True
    objective_value: float = 0.0
    intermediate_objective: float = 0.0
    right_null_residual: float = 0.0
    left_null_residual: float = 0.0
    solver: str = "cholesky"
    matrix_type: str = MatrixType.general.name
    observed_structures: Tuple[str, ...] = ()
    timing: Union[Dict[str, float], None] = None
    intermediate: Union[scipy.sparse.csr_matrix, None] = None

    def to_dict(self, timing: bool = True) -> dict:
        res = {
            "schema_version": SCHEMA_VERSION,
            "nnz": self.nnz,
            "n_unknowns": self.n_unknowns,
            "n_bins": self.n_bins,
            "rank": self.rank,
            "ridge_used": self.ridge_used,
            "ridge": json_float(self.ridge),
            "cg_iterations": self.cg_iterations,
            "cg_residual": json_float(self.cg_residual),
            "cg_converged": self.cg_converged,
            "objective_value": json_float(self.objective_value),
            "intermediate_objective": json_float(self.intermediate_objective),
            "right_null_residual": json_float(self.right_null_residual),
            "left_null_residual": json_float(self.left_null_residual),
            "solver": self.solver,
            "matrix_type": self.matrix_type,
            "observed_structures": list(self.observed_structures),
        }
        if timing:
            res["timing"] = {name: round(seconds, 6) for name, seconds in (self.timing or {}).items()}
        return res

    def to_string(self, timing: bool = True):
        res = Style.BRIGHT + "sparsified" + Style.RESET_ALL
        res += Fore.CYAN + ":" + Style.RESET_ALL
        res += f" nnz {self.nnz}, {self.n_unknowns} unknowns in {self.n_bins} bins, rank {self.rank}"
        res += f"\nJ(X) = {self.objective_value:.6e} (J(Y) = {self.intermediate_objective:.6e}), solver {self.solver}"
        if self.ridge_used:
            res += "\n" + Fore.YELLOW + f"ridge {self.ridge:.3e} added to the reduced Hessian" + Style.RESET_ALL
        if self.cg_iterations or not self.cg_converged:
            color = Fore.RESET if self.cg_converged else Fore.YELLOW
            res += "\n" + color + f"null-space CG: {self.cg_iterations} iterations, "
            res += f"residual {self.cg_residual:.3e}" + Style.RESET_ALL
        if self.observed_structures:
            res += "\n" + Style.DIM + "input structures: " + ", ".join(self.observed_structures) + Style.RESET_ALL
        if timing and self.timing:
            res += "\n" + Style.DIM
            res += ", ".join(f"{name} {seconds:.3f}s" for name, seconds in self.timing.items())
            res += Style.RESET_ALL
        return res

    def __str__(self):
        return self.to_string()


class DiagnosticsReport(NamedTuple):
    rank: int
    cond_pinv_product: float
    pinv_relative_difference: float
    objective_value: float
    nnz: int
    nnz_ratio: float
    hessian_condition: Union[float, None] = None
    hessian_size: int = 0

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "rank": self.rank,
            "cond_pinv_product": json_float(self.cond_pinv_product),
            "pinv_relative_difference": json_float(self.pinv_relative_difference),
            "objective_value": json_float(self.objective_value),
            "nnz": self.nnz,
            "nnz_ratio": json_float(self.nnz_ratio),
            "hessian_condition": json_float(self.hessian_condition),
            "hessian_size": self.hessian_size,
        }

    def to_string(self):
        res = Style.BRIGHT + "diagnostics" + Style.RESET_ALL + Fore.CYAN + ":" + Style.RESET_ALL
        res += f" rank {self.rank}, nnz {self.nnz} ({self.nnz_ratio:.2%})"
        res += f"\ncond(A^+ X) = {self.cond_pinv_product:.6g}"
        res += f"\n||X^+ - A^+||_F / ||A^+||_F = {self.pinv_relative_difference:.6g}"
        res += f"\nJ(X; A) = {self.objective_value:.6e}"
        if self.hessian_condition is not None:
            res += "\n" + Style.DIM + f"pattern Hessian ({self.hessian_size} unknowns): "
            res += f"cond {self.hessian_condition:.6g}" + Style.RESET_ALL
        return res

    def __str__(self):
        return self.to_string()


class SweepRow(NamedTuple):
    max_bins: int
    n_bins: int
    cond_pinv_product: float
    pinv_relative_difference: float
    objective_value: float

    def to_dict(self) -> dict:
        return {
            "max_bins": self.max_bins,
            "n_bins": self.n_bins,
            "cond_pinv_product": json_float(self.cond_pinv_product),
            "pinv_relative_difference": json_float(self.pinv_relative_difference),
            "objective_value": json_float(self.objective_value),
        }


def _dense(x) -> np.ndarray:
    if scipy.sparse.issparse(x):
        return x.toarray()
    return np.asarray(x)


def _as_pattern(pattern, shape) -> SparsityPattern:
    if not isinstance(pattern, SparsityPattern):
        pattern = pattern_from_mask(pattern)
    if pattern.shape != tuple(shape):
        raise InvalidArgumentError(f"pattern shape {pattern.shape} does not match matrix shape {tuple(shape)}")
    return pattern


def _symmetrize(x: np.ndarray, kind: str) -> np.ndarray:
    if kind in ("hermitian", "hermitian_pos_def", "hermitian_pos_semi_def"):
        return 0.5 * (x + x.conj().T)
    if kind == "skew_hermitian":
        return 0.5 * (x - x.conj().T)
    if kind == "complex_symmetric":
        return 0.5 * (x + x.T)
    return x


def _check_input_structure(a: np.ndarray, matrix_type: MatrixType):
    kind = matrix_type.structure
    if kind is None:
        return
    violations = structure_violations(a, {kind}, tol=INPUT_STRUCTURE_TOL)
    if violations:
        raise StructureError(
            f"input does not match matrix type `{kind}`: " + "; ".join(violation.message for violation in violations)
        )


def _finish_output(x, matrix_type: MatrixType, observed) -> scipy.sparse.csr_matrix:
    """Check the claimed structure survived, symmetrize exactly and log the observed structures"""
    x_dense = _dense(x)
    kind = matrix_type.structure
    if kind is not None:
        output_kind = "hermitian" if kind.startswith("hermitian") else kind
        violations = structure_violations(x_dense, {output_kind}, tol=OUTPUT_STRUCTURE_TOL, subject="output")
        if violations:
            raise StructureError(f"output lost the `{output_kind}` structure: {violations[0].message}")
        x_pattern = x.tocoo()
        x_dense = _symmetrize(x_dense, kind)
        x = csr_on_pattern(
            SparsityPattern.from_arrays(x.shape[0], x.shape[1], x_pattern.row, x_pattern.col),
            x_dense[x_pattern.row, x_pattern.col][np.lexsort((x_pattern.col, x_pattern.row))],
        )
    if observed:
        kept = observed_structures(x_dense, tol=OUTPUT_STRUCTURE_TOL)
        for structure in sorted(observed):
            _logger.info(
                "input is %s; the output %s it", structure, "keeps" if structure in kept else "does not keep"
            )
    return x


def _null_residuals(x, fact: QrPinvFactorization) -> Tuple[float, float]:
    x_dense = _dense(x)
    x_norm = np.linalg.norm(x_dense)
    if not x_norm or fact.right_null is None:
        return 0.0, 0.0
    right = np.linalg.norm(x_dense @ fact.right_null) / x_norm
    left = np.linalg.norm(fact.left_null.conj().T @ x_dense) / x_norm
    return float(right), float(left)


def _normalized(a: np.ndarray) -> Tuple[np.ndarray, float]:
    """``a`` over its largest entry magnitude, and that magnitude (1 for the zero matrix)

    J, the pattern rule and the bins do not change when ``a`` is scaled;
    the weights ``A^+ A^+*`` would overflow or underflow at extreme scales.
    """
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if not scale or not math.isfinite(scale):
        return a, 1.0
    return a / scale, scale


def _prepare(a, cfg: SparsifyConfig, timings: Dict[str, float], null_spaces: bool):
    """Normalized and exactly structured input, its scale, factorization and observed structures"""
    with stage("factorize", timings):
        a, scale = _normalized(as_dense(a))
    with stage("structure", timings):
        _check_input_structure(a, cfg.matrix_type)
        kind = cfg.matrix_type.structure
        if kind is not None:
            a = _symmetrize(a, kind)
        observed = observed_structures(a) if a.shape[0] == a.shape[1] else set()
    with stage("factorize", timings):
        rank_tol = None if cfg.rank_tol_override is None else cfg.rank_tol_override / scale
        fact = factorize(a, rank_tol=rank_tol, null_spaces=null_spaces)
    return a, scale, fact, observed


def _reduced_solve(mis: MisfitOperator, bins) -> Tuple[np.ndarray, bool, float, str]:
    system = assemble_reduced(mis, bins)
    try:
        sol = solve_spd(system)
        return sol.y, sol.ridge_used, sol.ridge, "cholesky"
    except SingularSystemError as spd_err:
        _logger.warning("%s; falling back to the least-squares solution", spd_err)
    y = scipy.linalg.lstsq(system.hessian, system.rhs, lapack_driver="gelsy")[0]
    return y, False, 0.0, "lstsq"


def _two_step(a, pattern: Union[SparsityPattern, None], cfg: SparsifyConfig):
    cfg = validate_config(cfg)
    timings: Dict[str, float] = {}
    a, scale, fact, observed = _prepare(a, cfg, timings, cfg.impose_null_spaces)
    with stage("pattern", timings):
        if pattern is None:
            pattern = lp_pattern(a, cfg.sparsity_ratio, cfg.sparsity_norm_p)
        else:
            pattern = _as_pattern(pattern, a.shape)
    with stage("bins", timings):
        bins = compute_bins(a, pattern, cfg.max_num_bins)
    with stage("reduced_solve", timings):
        mis = build_misfit(a, fact.pinv)
        y_bins, ridge_used, ridge, solver_name = _reduced_solve(mis, bins)
        y = expand_bins(y_bins, bins)
    x = y
    cg_iterations, cg_residual, cg_converged = 0, 0.0, True
    if cfg.impose_null_spaces and fact.is_rank_deficient:
        with stage("nullspace", timings):
            ns = impose_nullspaces(y, ConstraintOperator(pattern, fact.right_null, fact.left_null), cfg.cg_tol)
            x, cg_iterations, cg_residual, cg_converged = ns
    with stage("structure", timings):
        x = _finish_output(x, cfg.matrix_type, observed)
    right_res, left_res = _null_residuals(x, fact) if cfg.impose_null_spaces else (0.0, 0.0)
    objective_value, intermediate_objective = mis.evaluate(x), mis.evaluate(y)
    x, y = x * scale, y * scale
    report = SparsifyReport(
        nnz=pattern.nnz,
        n_unknowns=pattern.nnz * (2 if bins.is_complex else 1),
        n_bins=bins.n_bins,
        rank=fact.rank,
        ridge_used=ridge_used,
        ridge=ridge,
        cg_iterations=cg_iterations,
        cg_residual=cg_residual,
        cg_converged=cg_converged,
        objective_value=objective_value,
        intermediate_objective=intermediate_objective,
        right_null_residual=right_res,
        left_null_residual=left_res,
        solver=solver_name,
        matrix_type=cfg.matrix_type.name,
        observed_structures=tuple(sorted(observed)),
        timing=timings,
        intermediate=y,
    )
    _logger.info(
        "sparsified %dx%d matrix: %d unknowns, %d bins, J = %.6e",
        a.shape[0],
        a.shape[1],
        report.n_unknowns,
        report.n_bins,
        report.objective_value,
    )
    return x, report


def sparsify(a, cfg: SparsifyConfig = SparsifyConfig()) -> Tuple[scipy.sparse.csr_matrix, SparsifyReport]:
    """Binned two-step sparsification on the Lp-norm pattern of ``a``"""
    return _two_step(a, None, cfg)


def sparsify_for_pattern(
    a, pattern, cfg: SparsifyConfig = SparsifyConfig()
) -> Tuple[scipy.sparse.csr_matrix, SparsifyReport]:
    """Binned two-step sparsification on a given pattern (SparsityPattern or 0/1 mask)"""
    if pattern is None:
        raise InvalidArgumentError("a pattern is required")
    return _two_step(a, pattern, cfg)


def sparsify_exact_detailed(
    a, cfg: SparsifyConfig = SparsifyConfig(), pattern=None
) -> Tuple[scipy.sparse.csr_matrix, SparsifyReport]:
    """One-step constrained solve without binning; the pattern defaults to the Lp-norm rule"""
    cfg = validate_config(cfg)
    timings: Dict[str, float] = {}
    a, scale, fact, observed = _prepare(a, cfg, timings, True)
    with stage("pattern", timings):
        if pattern is None:
            pattern = lp_pattern(a, cfg.sparsity_ratio, cfg.sparsity_norm_p)
        else:
            pattern = _as_pattern(pattern, a.shape)
    right_null, left_null = fact.right_null, fact.left_null
    if not cfg.impose_null_spaces:
        right_null = np.zeros((a.shape[1], 0), dtype=a.dtype)
        left_null = np.zeros((a.shape[0], 0), dtype=a.dtype)
    with stage("reduced_solve", timings):
        x = solve_exact(a, fact.pinv, pattern, right_null, left_null)
    with stage("structure", timings):
        x = _finish_output(x, cfg.matrix_type, observed)
    mis_value = objective(x, a, fact.pinv)
    right_res, left_res = _null_residuals(x, fact) if cfg.impose_null_spaces else (0.0, 0.0)
    x = x * scale
    n_unknowns = pattern.nnz * (2 if np.iscomplexobj(a) else 1)
    report = SparsifyReport(
        nnz=pattern.nnz,
        n_unknowns=n_unknowns,
        n_bins=n_unknowns,
        rank=fact.rank,
        objective_value=mis_value,
        intermediate_objective=mis_value,
        right_null_residual=right_res,
        left_null_residual=left_res,
        solver="exact",
        matrix_type=cfg.matrix_type.name,
        observed_structures=tuple(sorted(observed)),
        timing=timings,
        intermediate=x,
    )
    return x, report


def sparsify_exact(a, ratio: float = 0.8, p: float = 1.0) -> scipy.sparse.csr_matrix:
    return sparsify_exact_detailed(a, SparsifyConfig(sparsity_ratio=ratio, sparsity_norm_p=p))[0]


def sparsify_exact_for_pattern(a, pattern) -> scipy.sparse.csr_matrix:
    if pattern is None:
        raise InvalidArgumentError("a pattern is required")
    return sparsify_exact_detailed(a, SparsifyConfig(), pattern=pattern)[0]


def _spectral_quality(pinv: np.ndarray, rank: int, x) -> Tuple[float, float]:
    """``cond(A^+ X)`` over the leading ``rank`` singular values and ``||X^+ - A^+||_F / ||A^+||_F``"""
    x_dense = _dense(x)
    cond = condition_number(pinv @ x_dense, rank) if rank else float("inf")
    pinv_norm = np.linalg.norm(pinv)
    diff = np.linalg.norm(scipy.linalg.pinv(x_dense) - pinv)
    if pinv_norm:
        return cond, float(diff / pinv_norm)
    return cond, 0.0 if diff == 0 else float("inf")


def diagnostics(a, x, hessian: bool = False) -> DiagnosticsReport:
    """Spectral quality of ``x`` as a replacement of ``a``

    With ``hessian`` the un-binned pattern Hessian over the stored entries of ``x``
    is formed and its condition number reported (only up to 2000 entries).
    """
    a = as_dense(a)
    x = scipy.sparse.csr_matrix(x)
    if x.shape != a.shape:
        raise InvalidArgumentError(f"x has shape {x.shape}, expected {a.shape}")
    a, scale = _normalized(a)
    x = x / scale
    fact = factorize(a, null_spaces=False)
    cond, pinv_diff = _spectral_quality(fact.pinv, fact.rank, x)
    x_coo = x.tocoo()
    pattern = SparsityPattern.from_arrays(a.shape[0], a.shape[1], x_coo.row, x_coo.col)
    hessian_size = pattern.nnz * (2 if np.iscomplexobj(a) else 1)
    hessian_condition = None
    if hessian:
        if pattern.nnz <= MAX_DENSE_HESSIAN_NNZ:
            hessian_condition = condition_number(pattern_hessian(build_misfit(a, fact.pinv), pattern))
        else:
            _logger.warning(
                "pattern Hessian condition skipped: %d entries above %d", pattern.nnz, MAX_DENSE_HESSIAN_NNZ
            )
    return DiagnosticsReport(
        rank=fact.rank,
        cond_pinv_product=cond,
        pinv_relative_difference=pinv_diff,
        objective_value=objective(x, a, fact.pinv),
        nnz=pattern.nnz,
        nnz_ratio=pattern.nnz / a.size,
        hessian_condition=hessian_condition,
        hessian_size=hessian_size,
    )


def structure_check(a, kind) -> bool:
    """True iff ``a`` has the structure ``kind`` (a MatrixType or a structure name) within 1e-12 ||a||_F"""
    if isinstance(kind, str) and kind.replace("-", "_") in CLAIMED_KINDS:
        kind_name = kind.replace("-", "_")
    else:
        kind_name = MatrixType.parse(kind).structure
    if kind_name is None:
        return True
    return not structure_violations(_normalized(as_dense(a))[0], {kind_name}, tol=INPUT_STRUCTURE_TOL)


def sweep_bins(
    a, ratio: float, p: float, bin_counts: Sequence[int], impose_null_spaces: bool = False
) -> List[SweepRow]:
    """Spectral quality for each ``max_bins`` in ``bin_counts`` on one fixed pattern, ascending"""
    counts = sorted(set(bin_counts))
    for count in counts:
        validate_config(SparsifyConfig(sparsity_ratio=ratio, sparsity_norm_p=p, max_num_bins=count))
    a = as_dense(a)
    a = _normalized(a)[0]
    fact = factorize(a, null_spaces=impose_null_spaces)
    pattern = lp_pattern(a, ratio, p)
    mis = build_misfit(a, fact.pinv)
    constraints = None
    if impose_null_spaces and fact.is_rank_deficient:
        constraints = ConstraintOperator(pattern, fact.right_null, fact.left_null)
    rows = []
    for count in counts:
        bins = compute_bins(a, pattern, count)
        x = expand_bins(_reduced_solve(mis, bins)[0], bins)
        if constraints is not None:
            x = impose_nullspaces(x, constraints).x
        cond, pinv_diff = _spectral_quality(fact.pinv, fact.rank, x)
        rows.append(SweepRow(count, bins.n_bins, cond, pinv_diff, mis.evaluate(x)))
        _logger.info("max_bins %d: %d bins, cond(A^+ X) = %.6g", count, bins.n_bins, cond)
    return rows


def lpn(
    num_rows: int,
    num_cols: int,
    col_values,
    col_leading_dim: int,
    sparsity_ratio: float,
    sparsity_norm_p: float,
    max_num_bins: int,
    impose_null_spaces: bool,
    matrix_type=MatrixType.general,
) -> Tuple[int, Union[CsrTriple, None]]:
    """Flat entry point: zero status and the CSR triple, or a nonzero status and None"""
    try:
        a = dense_from_columns(num_rows, num_cols, col_values, col_leading_dim)
        cfg = SparsifyConfig(
            sparsity_ratio=sparsity_ratio,
            sparsity_norm_p=sparsity_norm_p,
            max_num_bins=max_num_bins,
            impose_null_spaces=impose_null_spaces,
            matrix_type=MatrixType.parse(matrix_type),
        )
        x, __ = sparsify(a, cfg)
    except InvalidArgumentError as err:
        _logger.error("%s", err)
        return STATUS_INVALID_ARGUMENT, None
    except StructureError as err:
        _logger.error("%s", err)
        return STATUS_STRUCTURE, None
    except SizeGuardError as err:
        _logger.error("%s", err)
        return STATUS_SIZE_GUARD, None
    except (SparsifyError, np.linalg.LinAlgError) as err:
        _logger.error("%s", err)
        return STATUS_NUMERICAL, None
    return STATUS_OK, CsrTriple.from_csr(x)
