"""Exception types raised by the tomography routines."""


class TomographyError(ValueError):
    """Base class for all precondition failures in this package."""


class InvalidDimensionError(TomographyError):
    pass


class InvalidOperatorError(TomographyError):
    """A probability operator or POVM group violates its invariants."""


class IncompleteSchemeError(TomographyError):
    """The measurement matrix does not have full column rank d**2."""

    def __init__(self, rank, required):
        self.rank = rank
        self.required = required
        super().__init__(
            f"scheme is not informationally complete: rank {rank} < {required}"
        )


class DegenerateSchemeError(TomographyError):
    """A scheme generator was asked for parameters that cannot be complete."""


class NotMinimalError(TomographyError):
    """A SIC structure check was requested for a scheme with N != d**2."""


class ContractViolation(TomographyError):
    """An input vector violates a documented contract (length, S_0, signs)."""


class DegenerateReconstructionError(TomographyError):
    """A reconstructed coefficient vector has non-positive trace."""
