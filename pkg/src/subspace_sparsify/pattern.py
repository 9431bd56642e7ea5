"""Sparsity patterns: the Lp-norm row/column rule and user-supplied masks"""
import logging
import math
from typing import List, NamedTuple, Tuple

import numpy as np
import scipy.sparse

from subspace_sparsify.core_linalg import as_dense
from subspace_sparsify.errors import InvalidArgumentError

_logger = logging.getLogger(__name__)


class SparsityPattern(NamedTuple):
    """Retained positions, strictly sorted row-major"""

    num_rows: int
    num_cols: int
    positions: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def from_arrays(cls, num_rows, num_cols, rows, cols):
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if rows.shape != cols.shape:
            raise InvalidArgumentError("rows and cols must have the same length")
        if rows.size and (rows.min() < 0 or rows.max() >= num_rows or cols.min() < 0 or cols.max() >= num_cols):
            raise InvalidArgumentError(f"pattern position out of bounds for a {num_rows}x{num_cols} matrix")
        keys = np.unique(rows * num_cols + cols)
        if keys.size != rows.size:
            raise InvalidArgumentError("pattern contains duplicate positions")
        positions = tuple(zip((keys // num_cols).tolist(), (keys % num_cols).tolist()))
        return cls(int(num_rows), int(num_cols), positions)

    @property
    def nnz(self) -> int:
        return len(self.positions)

    @property
    def shape(self):
        return self.num_rows, self.num_cols

    @property
    def rows(self) -> np.ndarray:
        return np.array([pos[0] for pos in self.positions], dtype=np.intp)

    @property
    def cols(self) -> np.ndarray:
        return np.array([pos[1] for pos in self.positions], dtype=np.intp)

    def row_lists(self) -> List[np.ndarray]:
        """Pattern entry indices of every row"""
        rows = self.rows
        return [np.flatnonzero(rows == i) for i in range(self.num_rows)]

    def col_lists(self) -> List[np.ndarray]:
        """Pattern entry indices of every column"""
        cols = self.cols
        return [np.flatnonzero(cols == j) for j in range(self.num_cols)]

    def to_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=np.int8)
        if self.positions:
            mask[self.rows, self.cols] = 1
        return mask

    def transpose(self) -> "SparsityPattern":
        return SparsityPattern.from_arrays(self.num_cols, self.num_rows, self.cols, self.rows)


def _validate_rule(ratio, p):
    if not 0 <= ratio <= 1:
        raise InvalidArgumentError(f"sparsity ratio must be in [0, 1], got {ratio}")
    if not p >= 0:
        raise InvalidArgumentError(f"sparsity norm p must be in [0, inf], got {p}")


def _kept(mags: np.ndarray, ratio: float, p: float) -> np.ndarray:
    """Boolean mask of the entries kept by the prefix-threshold rule on one row or column"""
    keep = np.zeros(mags.shape, dtype=bool)
    nonzero = mags > 0
    if ratio == 0 or not nonzero.any():
        return keep
    if ratio == 1:
        return nonzero
    values = np.sort(mags[nonzero])[::-1]
    if p == 0:
        last = math.ceil(ratio * values.size) - 1
    elif math.isinf(p):
        last = 0
    else:
        powered = (values / values[0]) ** p
        cumulative = np.cumsum(powered)
        last = int(np.argmax(cumulative >= ratio**p * cumulative[-1]))
    # ties with the last kept magnitude are kept as well
    return mags >= values[last]


def lp_pattern(a, ratio: float, p: float) -> SparsityPattern:
    """Union of the entries kept row-wise and column-wise by the Lp-norm rule

    Within a vector the largest magnitudes are kept until the kept part holds
    ``ratio**p`` of the p-powered sum; exact zeros are never kept.
    """
    _validate_rule(ratio, p)
    mags = np.abs(as_dense(a))
    row_keep = np.array([_kept(row, ratio, p) for row in mags])
    col_keep = np.array([_kept(col, ratio, p) for col in mags.T]).T
    rows, cols = np.nonzero(row_keep | col_keep)
    pattern = SparsityPattern.from_arrays(mags.shape[0], mags.shape[1], rows, cols)
    _logger.debug("Lp pattern (ratio=%s, p=%s): %d of %d positions", ratio, p, pattern.nnz, mags.size)
    return pattern


def pattern_from_mask(mask) -> SparsityPattern:
    """Positions of the ones of a 0/1 mask (dense, boolean or scipy sparse)"""
    if scipy.sparse.issparse(mask):
        mask = mask.toarray()
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"pattern mask must be 2-D, got {arr.ndim} dimension(s)")
    if arr.dtype != bool and not np.all((arr == 0) | (arr == 1)):
        raise InvalidArgumentError("pattern mask entries must be 0 or 1")
    rows, cols = np.nonzero(arr)
    return SparsityPattern.from_arrays(arr.shape[0], arr.shape[1], rows, cols)
