"""Exception hierarchy shared by all modules."""


class SpectraError(Exception):
    """Base class for every error raised by :mod:`weyl_spectra`."""


class InvalidMeasure(SpectraError, ValueError):
    """Atom data violates the Hermitian/PSD or distinct-abscissa invariants."""


class AtomHit(SpectraError, ValueError):
    """A real evaluation point coincides with an atom abscissa."""


class NoTailBound(SpectraError):
    """The omitted part of a measure cannot be bounded at the requested point."""


class Inconclusive(SpectraError):
    """A limit or growth classification could not be decided.

    The ``record`` attribute carries the numbers that were examined.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class CriterionFails(SpectraError):
    """The boundary-limit criterion is violated in some direction."""


class InvalidInterval(SpectraError, ValueError):
    pass


class NonScalar(SpectraError, ValueError):
    """Operation only defined for one-dimensional (scalar) measures."""


class StepUnderflow(SpectraError):
    """The adaptive integrator could not make progress."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DiskNotShrinking(SpectraError):
    """Weyl disks fail to contract along the truncation ladder (limit circle)."""

    def __init__(self, message, center=None, radius=None):
        super().__init__(message)
        self.center = center
        self.radius = radius


class AtomNearEndpoint(SpectraError):
    pass


class PotentialError(SpectraError, ValueError):
    """Malformed potential expression or data."""
