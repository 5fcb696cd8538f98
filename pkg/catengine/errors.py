"""Error types raised by the simulation, root-finding and optimization layers."""


class CatEngineError(Exception):
    """Base class for every error raised by catengine."""


class CutoffTooSmall(CatEngineError, ValueError):
    """Truncated Fock space cannot hold the requested state within the tail bound."""


class IndexOutOfRange(CatEngineError, IndexError):
    """Photon-number index outside 0..cutoff."""


class NotNormalized(CatEngineError, ValueError):
    """A state expected to be normalized is not."""


class DegenerateQudit(CatEngineError, ValueError):
    """Every retained term of a cat qudit vanishes, so it cannot be normalized."""


class LeadingTermVanishes(CatEngineError, ValueError):
    """The k=n trigonometric factor of an SCQ polynomial is zero."""


class NonConvergence(CatEngineError, RuntimeError):
    """An iterative method exhausted its budget before reaching its tolerance."""


class ZeroProbability(CatEngineError, RuntimeError):
    """The heralding event has (numerically) zero probability."""


class DegenerateBS(CatEngineError, ValueError):
    """A beam splitter with vanishing reflection or transmission where a closed form divides by it."""


class UnsupportedInput(CatEngineError, ValueError):
    """Input state not expressible in the requested representation."""


class AllStartsInfeasible(CatEngineError, RuntimeError):
    """Every optimizer restart ended in the penalty region."""
