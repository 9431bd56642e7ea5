import logging
from typing import Iterable, List, Set, Union

import numpy as np
import scipy.linalg

from subspace_sparsify import utils
from subspace_sparsify.base_checker import BaseChecker, StructureViolation
from subspace_sparsify.errors import InvalidArgumentError

_logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12

# kinds a caller may claim; a violated claim is an error
CLAIMED_KINDS = (
    "hermitian",
    "skew_hermitian",
    "complex_symmetric",
    "skew_complex_symmetric",
    "hermitian_pos_def",
    "hermitian_pos_semi_def",
)
# kinds that are only observed and logged
OBSERVED_KINDS = ("circulant", "centrosymmetric", "persymmetric")


class ChecksStructure(BaseChecker):
    def __init__(
        self,
        a,
        enable: Union[Set, None] = None,
        tol: float = DEFAULT_TOL,
        subject: str = "input",
    ):
        super().__init__(enable)
        self.a = np.asarray(a)
        self.tol = tol
        self.subject = subject
        self.scale = float(np.linalg.norm(self.a))
        self.is_square = self.a.ndim == 2 and self.a.shape[0] == self.a.shape[1]
        claimed = [kind for kind in CLAIMED_KINDS if self.is_message_enabled(kind)]
        if claimed and not self.is_square:
            raise InvalidArgumentError(f"structure `{claimed[0]}` needs a square matrix, got {self.a.shape}")

    def _compare(self, code: str, other, message: str):
        deviation = float(np.linalg.norm(self.a - other))
        tolerance = self.tol * self.scale
        if deviation > tolerance:
            self.register_violation(code, message, deviation, tolerance, self.subject)

    def run(self) -> List[StructureViolation]:
        for check_meth in utils.getattr_checks(self):
            check_meth()
        return self.checks_errors

    @utils.only_required_for_checks("hermitian", "hermitian_pos_def", "hermitian_pos_semi_def")
    def check_hermitian(self):
        """* Check hermitian
        The matrix equals its conjugate transpose
        """
        self._compare("hermitian", self.a.conj().T, "matrix is not Hermitian")

    @utils.only_required_for_checks("skew_hermitian")
    def check_skew_hermitian(self):
        """* Check skew_hermitian
        The matrix equals minus its conjugate transpose
        """
        self._compare("skew_hermitian", -self.a.conj().T, "matrix is not skew-Hermitian")

    @utils.only_required_for_checks("complex_symmetric")
    def check_complex_symmetric(self):
        """* Check complex_symmetric
        The matrix equals its transpose (no conjugation)
        """
        self._compare("complex_symmetric", self.a.T, "matrix is not (complex) symmetric")

    @utils.only_required_for_checks("skew_complex_symmetric")
    def check_skew_complex_symmetric(self):
        """* Check skew_complex_symmetric
        The matrix equals minus its transpose
        """
        self._compare("skew_complex_symmetric", -self.a.T, "matrix is not skew-symmetric")

    @utils.only_required_for_checks("hermitian_pos_def")
    def check_pos_def(self):
        """* Check hermitian_pos_def
        Cholesky of the Hermitian part succeeds
        """
        try:
            scipy.linalg.cholesky(0.5 * (self.a + self.a.conj().T), lower=True)
        except np.linalg.LinAlgError as chol_err:
            self.register_violation(
                "hermitian_pos_def", f"matrix is not positive definite: {chol_err}", subject=self.subject
            )

    @utils.only_required_for_checks("hermitian_pos_semi_def")
    def check_pos_semi_def(self):
        """* Check hermitian_pos_semi_def
        No eigenvalue of the Hermitian part below -tol * ||A||_F
        """
        lowest = float(scipy.linalg.eigvalsh(0.5 * (self.a + self.a.conj().T))[0])
        tolerance = self.tol * self.scale
        if lowest < -tolerance:
            self.register_violation(
                "hermitian_pos_semi_def",
                f"matrix has the negative eigenvalue {lowest:.3e}",
                -lowest,
                tolerance,
                self.subject,
            )

    @utils.only_required_for_checks("circulant")
    def check_circulant(self):
        """* Check circulant
        Every row is the previous row shifted one place to the right
        """
        if not self.is_square:
            self.register_violation("circulant", "matrix is not square", subject=self.subject)
            return
        size = self.a.shape[0]
        shifts = (np.arange(size)[None, :] - np.arange(size)[:, None]) % size
        self._compare("circulant", self.a[0, shifts], "matrix is not circulant")

    @utils.only_required_for_checks("centrosymmetric")
    def check_centrosymmetric(self):
        """* Check centrosymmetric
        The matrix is unchanged by a half turn
        """
        if not self.is_square:
            self.register_violation("centrosymmetric", "matrix is not square", subject=self.subject)
            return
        self._compare("centrosymmetric", self.a[::-1, ::-1], "matrix is not centrosymmetric")

    @utils.only_required_for_checks("persymmetric")
    def check_persymmetric(self):
        """* Check persymmetric
        The matrix is symmetric about its anti-diagonal
        """
        if not self.is_square:
            self.register_violation("persymmetric", "matrix is not square", subject=self.subject)
            return
        self._compare("persymmetric", self.a.T[::-1, ::-1], "matrix is not persymmetric")


def structure_violations(a, kinds: Iterable[str], tol: float = DEFAULT_TOL, subject: str = "input"):
    kinds = set(kinds)
    unknown = kinds - set(CLAIMED_KINDS) - set(OBSERVED_KINDS)
    if unknown:
        raise InvalidArgumentError(f"unknown structure kind(s): {', '.join(sorted(unknown))}")
    if not kinds:
        return []
    return ChecksStructure(a, enable=kinds, tol=tol, subject=subject).run()


def observed_structures(a, tol: float = DEFAULT_TOL) -> Set[str]:
    """The log-only kinds ``a`` has"""
    violated = {violation.code for violation in structure_violations(a, OBSERVED_KINDS, tol)}
    return set(OBSERVED_KINDS) - violated
