"""Bin identifiers: nearly equal pattern values share one optimization unknown

Every scalar part (real, and imaginary for complex input) is split into
negative, zero and positive classes. A class with extent ``[lo, hi]`` in
magnitude is cut into ``max_bins`` uniform bins of width ``h = (hi - lo) / max_bins``
and an entry of magnitude ``v`` goes to bin ``min(floor((v - lo) / h) + 1, max_bins)``.
Non-empty bins are then numbered 1..n_bins: negative class first, then zero,
then positive, then the imaginary-part classes.
"""
import logging
from typing import List, NamedTuple, Union

import numpy as np
import scipy.sparse

from subspace_sparsify.core_linalg import as_dense
from subspace_sparsify.errors import InvalidArgumentError
from subspace_sparsify.pattern import SparsityPattern

_logger = logging.getLogger(__name__)

REAL_PART = "real"
IMAG_PART = "imag"


class BinAssignment(NamedTuple):
    pattern: SparsityPattern
    real_ids: np.ndarray
    imag_ids: Union[np.ndarray, None]
    n_bins: int

    @property
    def is_complex(self) -> bool:
        return self.imag_ids is not None

    @property
    def n_real_bins(self) -> int:
        return int(self.real_ids.max()) if self.real_ids.size else 0

    @property
    def n_imag_bins(self) -> int:
        return self.n_bins - self.n_real_bins

    def entry_lists(self) -> List[np.ndarray]:
        """Member pattern-entry indices of every bin, in id order"""
        ids = self.real_ids if not self.is_complex else np.concatenate([self.real_ids, self.imag_ids])
        nnz = self.pattern.nnz
        return [np.flatnonzero(ids == bin_id) % max(nnz, 1) for bin_id in range(1, self.n_bins + 1)]

    def id_matrix(self, part: str = REAL_PART) -> np.ndarray:
        """The bin identifier matrix of one part; 0 outside the pattern"""
        ids = self.real_ids if part == REAL_PART else self.imag_ids
        if ids is None:
            raise InvalidArgumentError("real bin assignments have no imaginary part")
        res = np.zeros(self.pattern.shape, dtype=np.int64)
        if self.pattern.nnz:
            res[self.pattern.rows, self.pattern.cols] = ids
        return res

    def transpose(self) -> "BinAssignment":
        pattern_t = self.pattern.transpose()
        real_t = self.id_matrix(REAL_PART).T[pattern_t.rows, pattern_t.cols] if pattern_t.nnz else self.real_ids
        imag_t = None
        if self.is_complex:
            imag_t = self.id_matrix(IMAG_PART).T[pattern_t.rows, pattern_t.cols] if pattern_t.nnz else self.imag_ids
        return BinAssignment(pattern_t, real_t, imag_t, self.n_bins)


def _raw_keys(values: np.ndarray, max_bins: int) -> np.ndarray:
    """Sortable (class, raw bin) key of every value; equal keys mean the same bin"""
    keys = np.zeros(values.shape, dtype=np.int64)
    span = max_bins + 1
    for class_rank, members in enumerate((values < 0, values == 0, values > 0)):
        if not members.any():
            continue
        mags = np.abs(values[members])
        low, high = mags.min(), mags.max()
        if high == low:
            raw = np.ones(mags.shape, dtype=np.int64)
        else:
            width = (high - low) / max_bins
            raw = np.minimum(np.floor((mags - low) / width).astype(np.int64) + 1, max_bins)
        if class_rank == 0:
            # ascending values in the negative class mean descending magnitudes
            raw = span - raw
        keys[members] = class_rank * span + raw
    return keys


def _dense_ids(values: np.ndarray, max_bins: int, first_id: int) -> np.ndarray:
    if not values.size:
        return np.zeros(0, dtype=np.int64)
    if max_bins == 0:
        return np.arange(first_id, first_id + values.size, dtype=np.int64)
    _, inverse = np.unique(_raw_keys(values, max_bins), return_inverse=True)
    return inverse.ravel().astype(np.int64) + first_id


def compute_bins(a, pattern: SparsityPattern, max_bins: int) -> BinAssignment:
    """Assign a bin identifier to every pattern entry (and part)

    ``max_bins == 0`` gives every entry its own bin.
    """
    if isinstance(max_bins, bool) or int(max_bins) != max_bins or max_bins < 0:
        raise InvalidArgumentError(f"max_bins must be an integer >= 0, got {max_bins}")
    max_bins = int(max_bins)
    a = as_dense(a)
    if a.shape != pattern.shape:
        raise InvalidArgumentError(f"pattern shape {pattern.shape} does not match matrix shape {a.shape}")
    values = a[pattern.rows, pattern.cols] if pattern.nnz else np.zeros(0, dtype=a.dtype)
    real_ids = _dense_ids(np.real(values), max_bins, 1)
    n_real = int(real_ids.max()) if real_ids.size else 0
    imag_ids = None
    n_bins = n_real
    if np.iscomplexobj(a):
        imag_ids = _dense_ids(np.imag(values), max_bins, n_real + 1)
        n_bins = int(imag_ids.max()) if imag_ids.size else n_real
    _logger.debug("binned %d pattern entries into %d bins (max_bins=%d)", pattern.nnz, n_bins, max_bins)
    return BinAssignment(pattern, real_ids, imag_ids, n_bins)


def _canonical(ids: np.ndarray) -> np.ndarray:
    """Relabel ids by order of first occurrence, keeping 0 (outside the pattern) as 0"""
    labels = {0: 0}
    flat = ids.ravel()
    res = np.empty(flat.shape, dtype=np.int64)
    for pos, bin_id in enumerate(flat.tolist()):
        res[pos] = labels.setdefault(bin_id, len(labels))
    return res


def bins_equivalent(b1: BinAssignment, b2: BinAssignment) -> bool:
    """True iff both assignments induce the same partition of positions, part by part"""
    if b1.pattern.shape != b2.pattern.shape:
        raise InvalidArgumentError(f"bin assignments have different sizes {b1.pattern.shape} and {b2.pattern.shape}")
    if b1.is_complex != b2.is_complex:
        return False
    parts = (REAL_PART, IMAG_PART) if b1.is_complex else (REAL_PART,)
    return all(np.array_equal(_canonical(b1.id_matrix(part)), _canonical(b2.id_matrix(part))) for part in parts)


def reduction_map(bins: BinAssignment) -> np.ndarray:
    """0-based bin index of every real unknown (real parts first, then imaginary parts)

    This is the column index of the single 1 in each row of the indicator matrix E.
    """
    if bins.is_complex:
        return np.concatenate([bins.real_ids, bins.imag_ids]) - 1
    return bins.real_ids - 1


def pattern_values(x, pattern: SparsityPattern) -> np.ndarray:
    """Values of a dense or scipy sparse matrix at the pattern positions, in pattern order"""
    if x.shape != pattern.shape:
        raise InvalidArgumentError(f"matrix shape {x.shape} does not match pattern shape {pattern.shape}")
    if not pattern.nnz:
        return np.zeros(0, dtype=x.dtype)
    if scipy.sparse.issparse(x):
        x = x.toarray()
    return np.asarray(x)[pattern.rows, pattern.cols]


def reduce_bins(x, bins: BinAssignment) -> np.ndarray:
    """One representative value per bin: the inverse of expanding bin values onto the pattern"""
    values = pattern_values(x, bins.pattern)
    parts = np.real(values)
    if bins.is_complex:
        parts = np.concatenate([parts, np.imag(values)])
    res = np.zeros(bins.n_bins, dtype=np.float64)
    # the last write wins; every member of a bin holds the same value
    res[reduction_map(bins)] = parts
    return res
