"""Exception types shared across the solver."""


class SolverError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SolverError):
    """A position lies outside the potential's domain."""


class SingularityError(SolverError):
    """Evaluation produced a non-finite value (e.g. expansion at a pole)."""


class ParameterError(SolverError):
    """Invalid parameters or precondition violation."""


class DegenerateSliceError(SolverError):
    """The slice matching system is singular (zero width or zero wavenumber)."""


class ResonanceSingularityError(SolverError):
    """A composition denominator vanished (exact closed-cavity resonance)."""


class InvalidClosureError(SolverError):
    """A boundary closure is not defined at the requested energy."""


class ReconstructionError(SolverError):
    """Wavefunction reconstruction failed (inconsistent root or zero norm)."""


class RangeError(SolverError):
    """A requested quantity overflows double precision."""


class NonConvergenceError(SolverError):
    """An iteration hit its cap without meeting tolerance.

    Carries ``best``, the best iterate found so far (type depends on the
    operation that raised), so callers can report partial results.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
