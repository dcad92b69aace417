"""Exception types raised by qwsojourn."""

from __future__ import annotations


class QWSojournError(Exception):
    """Base class for all package errors."""


class NonUnitaryCoin(QWSojournError, ValueError):
    """A user-supplied coin fails the unitarity check."""


class NonUnitarySample(NonUnitaryCoin):
    """A sampled coin came out non-unitary (should never happen)."""


class NotNormalized(QWSojournError, ValueError):
    """An initial chirality state does not have unit norm."""


class DegenerateBasis(QWSojournError, ArithmeticError):
    """Gram-Schmidt completion produced fewer than two new basis matrices."""


class NotInField(QWSojournError, ArithmeticError):
    """An exact operation would leave the field Q(i, sqrt 2)."""


class ResourceLimit(QWSojournError, RuntimeError):
    """A requested size exceeds the configured computation ceiling."""


class TruncationOverflow(QWSojournError, ValueError):
    """Table indices fall outside the series truncation orders."""


class NonNilpotentConstantTerm(QWSojournError, ValueError):
    """Series inversion requested for a series with nonzero constant term."""


class InsufficientOrder(QWSojournError, ValueError):
    """Too few series orders to run the convergence diagnostics."""
