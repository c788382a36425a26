"""Exception hierarchy.

Divergence of a construction that is *analytically* infinite is not an
error: evaluators return math.inf for it.  Exceptions are reserved for bad
inputs and for numerical procedures that failed to reach a conclusion.
"""

from __future__ import annotations


class GmonoError(Exception):
    """Base class for all library errors."""


class DomainError(GmonoError):
    """A point or parameter lies outside the interval/range it must be in."""


class GaugeError(GmonoError):
    """Invalid gauge data (non-positive value, missing entry, bad params)."""


class QuadratureError(GmonoError):
    """Adaptive quadrature failed to converge to the requested tolerance.

    Reported distinctly from analytic divergence, which is a value (inf),
    not an error.
    """


class InconclusiveError(GmonoError):
    """A numerical probe could not decide convergence vs divergence."""


class UndefinedMomentError(GmonoError):
    """Integral whose positive and negative parts are both infinite."""


class PreconditionError(GmonoError):
    """A documented precondition of an operation does not hold."""
