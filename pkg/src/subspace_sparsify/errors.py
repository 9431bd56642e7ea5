from typing import Union


class SparsifyError(Exception):
    """Base error of the package

    ``stage`` is filled in by the pipeline with the name of the stage
    (factorize, pattern, bins, reduced_solve, nullspace, structure) the error escaped from.
    """

    def __init__(self, message: str, stage: Union[str, None] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def __str__(self):
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


class InvalidArgumentError(SparsifyError, ValueError):
    pass


class RankInconsistencyError(SparsifyError):
    """The rank decision and the factors disagree (Cholesky breakdown, Gram-Schmidt collapse)"""


class SingularSystemError(SparsifyError):
    pass


class StructureError(SparsifyError):
    pass


class SizeGuardError(SparsifyError):
    pass


class MatrixMarketError(SparsifyError):
    def __init__(self, message: str, path: str = "", line: int = 0):
        super().__init__(message)
        self.path = path
        self.line = line

    def __str__(self):
        position = ":".join(str(x) for x in (self.path, self.line) if x)
        if position:
            return f"{position}: {self.message}"
        return self.message
