"""Exception types shared across the library.

The CLI maps these onto exit codes: invalid input exits 1, numerical
trouble (non-convergence, singular evaluations, degenerate contours)
exits 2.
"""

from __future__ import annotations


class DirtyLocusError(Exception):
    """Base class for all errors raised by this library."""


class InvalidInputError(DirtyLocusError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class NumericalFailureError(DirtyLocusError, RuntimeError):
    """An iterative routine failed to converge or resolve.

    ``best`` and ``residual`` carry the best iterate(s) seen,
    ``partial`` carries any partially completed result (e.g. a sweep
    truncated by the refinement depth limit).
    """

    def __init__(self, message: str, *, best=None, residual=None, partial=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.partial = partial


class SingularityError(DirtyLocusError, ZeroDivisionError):
    """Evaluation at the low-pass filter pole s = -1/tau."""


class PoleError(DirtyLocusError, ZeroDivisionError):
    """Evaluation of 1/H at a zero of H, i.e. at a closed-loop pole."""


class InconclusiveRouthError(DirtyLocusError, ArithmeticError):
    """A (near-)zero first-column entry makes the Routh array undecidable."""


class BifurcationSingularityError(DirtyLocusError, ArithmeticError):
    """The level-set ODE denominator vanished: a stationary point where
    locus branches meet."""

    def __init__(self, message: str, *, s: complex, tau: float, denominator: complex):
        super().__init__(message)
        self.s = s
        self.tau = tau
        self.denominator = denominator


class ContourDegeneracyError(DirtyLocusError, ArithmeticError):
    """A contour sample landed too close to a zero; pick another radius."""
