"""Matrix Market files

The header goes through ``scipy.io.mminfo``; the body is scanned here so every
error names its line. ``symmetric``, ``skew-symmetric`` and ``hermitian``
storage is expanded to the full matrix on read. Writing always produces
``general`` storage at 17 significant digits, coordinate entries sorted by
row then column.
"""
import io
import logging
import math
from typing import NamedTuple, Union

import numpy as np
import scipy.io
import scipy.sparse

from subspace_sparsify.binning import BinAssignment
from subspace_sparsify.errors import MatrixMarketError
from subspace_sparsify.pattern import SparsityPattern, pattern_from_mask
from subspace_sparsify.utils import atomic_write, full_norm_path

_logger = logging.getLogger(__name__)

FIELDS = ("real", "integer", "complex", "pattern")
SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


class MatrixMarketContent(NamedTuple):
    matrix: np.ndarray
    stored: np.ndarray
    layout: str
    field: str
    symmetry: str


def _parse_value(tokens, field: str, path: str, line_no: int):
    expected = {"pattern": 0, "complex": 2}.get(field, 1)
    if len(tokens) != expected:
        raise MatrixMarketError(f"expected {expected} value(s) for field `{field}`, got {len(tokens)}", path, line_no)
    try:
        if field == "pattern":
            return 1.0
        if field == "integer":
            return float(int(tokens[0]))
        if field == "complex":
            value = complex(float(tokens[0]), float(tokens[1]))
        else:
            value = float(tokens[0])
    except ValueError as value_err:
        raise MatrixMarketError(f"invalid number: {value_err}", path, line_no) from value_err
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise MatrixMarketError("NaN or Inf value", path, line_no)
    return value


def _data_lines(path: str):
    """(line number, tokens) of the size line and every entry, skipping the header, comments and blanks"""
    with open(path, encoding="UTF-8") as mm_file:
        for line_no, line in enumerate(mm_file, start=1):
            stripped = line.strip()
            if line_no == 1 or not stripped or stripped.startswith("%"):
                continue
            yield line_no, stripped.split()


def _mirror(matrix, stored, row, col, value, symmetry):
    if row == col:
        return
    if symmetry == "symmetric":
        matrix[col, row] = value
    elif symmetry == "skew-symmetric":
        matrix[col, row] = -value
    elif symmetry == "hermitian":
        matrix[col, row] = np.conj(value)
    else:
        return
    stored[col, row] = True


def _check_triangle(row, col, symmetry, path, line_no):
    if symmetry == "general":
        return
    if row < col:
        raise MatrixMarketError(
            f"entry ({row + 1}, {col + 1}) above the diagonal in {symmetry} storage", path, line_no
        )
    if symmetry == "skew-symmetric" and row == col:
        raise MatrixMarketError("diagonal entry in skew-symmetric storage", path, line_no)


def read_matrix_market_content(path: str) -> MatrixMarketContent:
    path = full_norm_path(path)
    # mminfo reports an unreadable file as a bad banner
    with open(path, "rb"):
        pass
    try:
        num_rows, num_cols, entries, layout, field, symmetry = scipy.io.mminfo(path)
    except (ValueError, IndexError, TypeError) as header_err:
        raise MatrixMarketError(f"malformed header: {header_err}", path, 1) from header_err
    if field not in FIELDS or symmetry not in SYMMETRIES:
        raise MatrixMarketError(f"unsupported field/symmetry `{field} {symmetry}`", path, 1)
    if num_rows < 1 or num_cols < 1:
        raise MatrixMarketError(f"matrix has a zero dimension {num_rows}x{num_cols}", path, 1)
    if symmetry != "general" and num_rows != num_cols:
        raise MatrixMarketError(f"{symmetry} storage needs a square matrix", path, 1)
    dtype = np.complex128 if field == "complex" else np.float64
    matrix = np.zeros((num_rows, num_cols), dtype=dtype)
    stored = np.zeros((num_rows, num_cols), dtype=bool)
    lines = _data_lines(path)
    next(lines, None)
    count = 0
    if layout == "array":
        if field == "pattern":
            raise MatrixMarketError("the pattern field needs the coordinate format", path, 1)
        positions = [
            (row, col)
            for col in range(num_cols)
            for row in range(num_rows)
            if symmetry == "general" or row > col or (row == col and symmetry != "skew-symmetric")
        ]
        for line_no, tokens in lines:
            if count >= len(positions):
                raise MatrixMarketError(f"more than the {len(positions)} expected values", path, line_no)
            row, col = positions[count]
            value = _parse_value(tokens, field, path, line_no)
            matrix[row, col] = value
            stored[row, col] = True
            _mirror(matrix, stored, row, col, value, symmetry)
            count += 1
        expected = len(positions)
    else:
        for line_no, tokens in lines:
            if len(tokens) < 2:
                raise MatrixMarketError("expected `row col [value]`", path, line_no)
            try:
                row, col = int(tokens[0]) - 1, int(tokens[1]) - 1
            except ValueError as index_err:
                raise MatrixMarketError(f"invalid index: {index_err}", path, line_no) from index_err
            if not (0 <= row < num_rows and 0 <= col < num_cols):
                raise MatrixMarketError(
                    f"index ({row + 1}, {col + 1}) out of bounds for a {num_rows}x{num_cols} matrix", path, line_no
                )
            _check_triangle(row, col, symmetry, path, line_no)
            if stored[row, col]:
                raise MatrixMarketError(f"duplicate entry ({row + 1}, {col + 1})", path, line_no)
            value = _parse_value(tokens[2:], field, path, line_no)
            matrix[row, col] = value
            stored[row, col] = True
            _mirror(matrix, stored, row, col, value, symmetry)
            count += 1
        expected = entries
    if count != expected:
        raise MatrixMarketError(f"expected {expected} entries, found {count}", path)
    _logger.debug("read %dx%d %s %s %s matrix from %s", num_rows, num_cols, layout, field, symmetry, path)
    return MatrixMarketContent(matrix, stored, layout, field, symmetry)


def read_matrix_market(path: str) -> np.ndarray:
    """Dense matrix held by a Matrix Market file (``pattern`` files read as 0/1)"""
    return read_matrix_market_content(path).matrix


def read_pattern(path: str) -> SparsityPattern:
    """Stored positions of a coordinate file, or the nonzeros of an array file"""
    content = read_matrix_market_content(path)
    if content.layout == "coordinate":
        rows, cols = np.nonzero(content.stored)
        return SparsityPattern.from_arrays(content.matrix.shape[0], content.matrix.shape[1], rows, cols)
    return pattern_from_mask(content.matrix != 0)


def dumps_matrix_market(x, field: Union[str, None] = None) -> bytes:
    """Render a dense array (array format) or a sparse matrix (coordinate format)"""
    target = io.BytesIO()
    if scipy.sparse.issparse(x):
        x = scipy.sparse.csr_matrix(x)
        x.sort_indices()
        x = x.tocoo()
    else:
        x = np.asarray(x)
    scipy.io.mmwrite(target, x, precision=17, field=field, symmetry="general")
    return target.getvalue()


def write_matrix_market(path: str, x, field: Union[str, None] = None):
    atomic_write(path, dumps_matrix_market(x, field=field))


def write_pattern(path: str, pattern: SparsityPattern):
    ones = np.ones(pattern.nnz, dtype=np.float64)
    mask = scipy.sparse.coo_matrix((ones, (pattern.rows, pattern.cols)), shape=pattern.shape)
    write_matrix_market(path, mask, field="pattern")


def write_bins(path: str, bins: BinAssignment):
    """Real-part ids as an integer file, or real/imaginary ids as the two parts of a complex file"""
    pattern = bins.pattern
    if bins.is_complex:
        values, field = bins.real_ids + 1j * bins.imag_ids, "complex"
    else:
        values, field = bins.real_ids.astype(np.int64), "integer"
    ids = scipy.sparse.coo_matrix((values, (pattern.rows, pattern.cols)), shape=pattern.shape)
    write_matrix_market(path, ids, field=field)


def read_sparse(path: str) -> scipy.sparse.csr_matrix:
    """CSR matrix of the stored entries of a coordinate file (stored zeros kept), or the nonzeros of an array file"""
    content = read_matrix_market_content(path)
    if content.layout == "coordinate":
        rows, cols = np.nonzero(content.stored)
    else:
        rows, cols = np.nonzero(content.matrix)
    return scipy.sparse.csr_matrix((content.matrix[rows, cols], (rows, cols)), shape=content.matrix.shape)
