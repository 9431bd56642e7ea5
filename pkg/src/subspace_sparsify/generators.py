"""Test matrices"""
from typing import Union

import numpy as np

from subspace_sparsify.errors import InvalidArgumentError

KINDS = ("paper40", "oscillatory", "rankdef", "hermitian", "skewhermitian", "complexsym")


def oscillatory_matrix(n: int = 40) -> np.ndarray:
    """``A_ij = cos(3^(1/4) sqrt(i) j)^5`` with 1-based indices"""
    i = np.arange(1, n + 1, dtype=np.float64)[:, None]
    j = np.arange(1, n + 1, dtype=np.float64)[None, :]
    return np.cos(3**0.25 * np.sqrt(i) * j) ** 5


def _complex_random(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def gen_test_matrix(kind: str, n: int = 40, rank: Union[int, None] = None, seed: int = 0) -> np.ndarray:
    """Dense ``n x n`` test matrix of the given kind

    ``rankdef`` has rank ``rank`` (default ``n - 2``, at least 1); the random
    kinds are reproducible through ``seed``.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be an integer >= 1, got {n}")
    n = int(n)
    rng = np.random.default_rng(seed)
    if kind in ("paper40", "oscillatory"):
        return oscillatory_matrix(n)
    if kind == "rankdef":
        if rank is None:
            rank = max(n - 2, 1)
        if not 1 <= rank <= n:
            raise InvalidArgumentError(f"rank must be in [1, {n}], got {rank}")
        return rng.standard_normal((n, rank)) @ rng.standard_normal((rank, n))
    if kind == "hermitian":
        base = _complex_random(rng, n)
        return base + base.conj().T
    if kind == "skewhermitian":
        base = _complex_random(rng, n)
        return base - base.conj().T
    if kind == "complexsym":
        base = _complex_random(rng, n)
        return base + base.T
    raise InvalidArgumentError(f"unknown matrix kind `{kind}`; expected one of {', '.join(KINDS)}")
