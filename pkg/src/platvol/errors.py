"""Exception hierarchy for platvol.

Every failure mode a caller can act on gets its own class; generic ValueError
is reserved for outright misuse of an API.
"""


class PlatvolError(Exception):
    """Base class for all library-specific errors."""


class LogAtMinusOne(PlatvolError):
    """Logarithm requested at (or too close to) the antipode -1."""


class CentralElement(PlatvolError):
    """Axis decomposition requested at a central element +-1."""


class RankMismatch(PlatvolError):
    """Free-group operands live in free groups of different ranks."""


class WordTooLong(PlatvolError):
    """A word operation exceeded the configured length cap."""


class NotAKnot(PlatvolError):
    """Plat closure has more than one component."""


class NotARepresentation(PlatvolError):
    """Assignment violates the presentation's relators."""


class ReducibleOrbit(PlatvolError):
    """Conjugation orbit is rank-deficient (abelian image)."""


class Reducible(ReducibleOrbit):
    """Representation is abelian where an irreducible one is required."""


class ConstraintViolated(PlatvolError):
    """Point does not satisfy the product-equals-identity constraint."""


class NoConvergence(PlatvolError):
    """Gauss-Newton failed to reach the residual tolerance."""


class ConvergedToReducible(PlatvolError):
    """Solver converged onto the abelian locus."""


class StepCollapse(PlatvolError):
    """Continuation step shrank to its minimum without convergence."""


class NotRegular(PlatvolError):
    """Volume evaluation requested at a non-regular intersection point."""


class DegenerateBasis(PlatvolError):
    """Assembled basis failed its independence check."""


class InconsistentRegularity(PlatvolError):
    """Transversality rank and twisted-cohomology dimension disagree."""


class MatchingFailure(PlatvolError):
    """Point correspondence across presentations is ambiguous."""


class NonCyclicAbelianization(PlatvolError):
    """Presentation does not abelianize to the infinite cyclic group."""


class CorruptCache(PlatvolError):
    """Cached record failed its hash or schema check."""
