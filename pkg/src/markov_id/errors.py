"""Exception types shared across the package."""


class MarkovIdError(Exception):
    """Base class for every error raised by this package."""


class RowSumError(MarkovIdError):
    """A matrix row deviates from unit sum beyond tolerance."""


class ZeroOnEdgeError(MarkovIdError):
    """A declared edge carries zero (or negative) probability mass."""


class OffEdgeMassError(MarkovIdError):
    """Nonzero probability mass sits outside the declared edge set."""


class NotIrreducibleError(MarkovIdError):
    """The chain's support digraph is not strongly connected."""


class NoConvergenceError(MarkovIdError):
    """An iterative solver hit its iteration cap.

    Carries the last two iterates so the caller can see how far apart
    the sequence still was.
    """

    def __init__(self, message: str, last_two: tuple[float, float] | None = None):
        super().__init__(message)
        self.last_two = last_two


class RationalizationFailedError(MarkovIdError):
    """No common denominator under the cap reproduces the distribution."""


class NotLumpableError(MarkovIdError):
    """Row block sums differ within a block, so merging breaks the Markov property."""


class EdgeMismatchError(MarkovIdError):
    """Incompatible edge sets or state counts between an embedding and a matrix."""


class TooLargeError(MarkovIdError):
    """A dense path enumeration would exceed the guard size."""


class IncompatibleStateCountError(MarkovIdError):
    """A trajectory's alphabet does not fit the expected state space."""


class PreconditionFailedError(MarkovIdError):
    """A statistical precondition (reversibility, stationary law, symmetry) fails."""


class ReferenceClassError(MarkovIdError):
    """A matrix falls outside the restricted class the test is defined on."""


class ExclusionRegionError(MarkovIdError):
    """An alternative is indistinguishable by contract: contrast at most epsilon."""
