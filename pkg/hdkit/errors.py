__all__ = (
    'HDError',
    'HDInvalidModelError',
    'HDConfigError',
    'HDFileNotFoundError',
    'HDNoConvergenceError',
    'HDBreakdownError',
    'HDNetworkError',
    'HDSingularMatrixError',
    'HDNoCrossingError',
    'HDOutOfGridError',
    'HDGridMismatchError',
    'HDUnbalanceableError',
    'HDRankDeficientError',
    'HDNonPositiveInputError',
    'HDInfeasibleError',
    'HDCorruptCampaignError',
)

class HDError(Exception):
    """
    Base class for errors raised by hdkit.
    """
    pass


class HDInvalidModelError(HDError):
    """
    Error raised when a detector model violates one or more of its invariants.

    :ivar diagnostics:  A list of ``(field, message)`` tuples, one per violated invariant.
    """
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join("%s: %s" % (f, m) for f, m in self.diagnostics))


class HDConfigError(HDError):
    """
    Error raised when a configuration file cannot be parsed or contains unknown keys.
    """
    pass


class HDFileNotFoundError(HDError):
    """
    Error raised when a file or preset does not exist.
    """
    pass


class HDNoConvergenceError(HDError):
    """
    Error raised when an iterative solver stops making progress.
    """
    pass


class HDBreakdownError(HDError):
    """
    Error raised when a bias point puts the transistor at or beyond its collector-emitter breakdown voltage.
    """
    pass


class HDNetworkError(HDError):
    """
    Error raised when a linear network is malformed (dangling node reference, no ground, disconnected).
    """
    pass


class HDSingularMatrixError(HDError):
    """
    Error raised when a nodal admittance matrix cannot be solved.
    """
    pass


class HDNoCrossingError(HDError):
    """
    Error raised when a spectrum never falls 3 dB below its plateau within its grid.
    """
    pass


class HDOutOfGridError(HDError):
    """
    Error raised when a frequency lies outside the grid of a spectrum.
    """
    pass


class HDGridMismatchError(HDError):
    """
    Error raised when two spectra that must share a frequency grid do not.
    """
    pass


class HDUnbalanceableError(HDError):
    """
    Error raised when the photocurrents can only be balanced by boosting the weaker photodiode.
    """
    pass


class HDRankDeficientError(HDError):
    """
    Error raised when a fit's Jacobian does not have full column rank.
    """
    pass


class HDNonPositiveInputError(HDError):
    """
    Error raised when a logarithmic fit receives zero or negative data.
    """
    pass


class HDInfeasibleError(HDError):
    """
    Error raised when a design search finds no point satisfying its constraints.
    """
    pass


class HDCorruptCampaignError(HDError):
    """
    Error raised when a stored campaign does not match the hashes in its manifest.
    """
    pass
