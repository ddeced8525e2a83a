"""Exception hierarchy shared by every module."""


class SymTCError(Exception):
    """Base class for all library errors."""


class NearZeroVector(SymTCError, ValueError):
    """Normalization was asked of a vector whose norm is at or below the
    singularity threshold (an input on an excluded diagonal/antipodal locus).
    """


class DimensionMismatch(SymTCError, ValueError):
    pass


class DiagonalPair(SymTCError, ValueError):
    """The two points lie in the same deck orbit."""


class DegeneratePair(SymTCError, ValueError):
    """A pair with x = +-y was passed where the pair must be off that locus."""


class NoRuleFound(SymTCError, ArithmeticError):
    """Every component of the bilinear map vanished on a pair of lines."""


class CoincidentImages(SymTCError, ValueError):
    """An embedding sent two distinct points to the same image."""


class Unsupported(SymTCError, ValueError):
    pass


class NotPrime(SymTCError, ValueError):
    pass


class UnverifiedWitness(SymTCError, ValueError):
    """A bilinear map was offered as a bound witness but failed (or skipped)
    numerical verification of its symmetry/axiality relations."""


# errors that mean "the input sits on a singular locus of the construction"
SINGULAR_ERRORS = (NearZeroVector, DiagonalPair, DegeneratePair, NoRuleFound, CoincidentImages)
