"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A precondition on arguments or code parameters is violated."""


class SingularMatrixError(ArithmeticError):
    """A matrix required to be nonsingular is not; carries the rank found."""

    def __init__(self, message, rank=None, size=None):
        super().__init__(message)
        self.rank = rank
        self.size = size


class InconsistentDataError(RuntimeError):
    """An overdetermined linear system has no solution (corrupt input)."""


class ConstructionError(RuntimeError):
    """Building the code itself failed (a should-never-happen condition)."""


class MdsViolationError(RuntimeError):
    """A k-subset of nodes failed to determine the codeword."""


class RepairFailureError(RuntimeError):
    """Cooperative repair hit a singular recover system; identifies which."""

    def __init__(self, message, u=None, ell=None, tau=None):
        super().__init__(message)
        self.u = u
        self.ell = ell
        self.tau = tau


class ProtocolOrderError(RuntimeError):
    """A repair phase ran before the phase it depends on completed."""


class ErasedSlotError(RuntimeError):
    """A read touched an erased shard slot."""


class ShardFormatError(ValueError):
    """A shard file or shard set is malformed or internally inconsistent."""
