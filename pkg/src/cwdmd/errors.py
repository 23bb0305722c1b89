"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end:
1 for configuration problems and 2 for numerical failures.
"""

from __future__ import annotations


class CwdmdError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class ConfigInvalid(CwdmdError):
    exit_code = 1


# dynsys
class NonFiniteState(CwdmdError):
    pass


class DimensionMismatch(CwdmdError):
    pass


class UnsupportedDimension(CwdmdError):
    pass


class SingularResolvent(CwdmdError):
    pass


# wavelet
class ZeroScale(CwdmdError):
    pass


class EmptyScales(CwdmdError):
    pass


class SignalTooShort(CwdmdError):
    pass


class NotAdmissible(CwdmdError):
    pass


class OutOfWindow(CwdmdError):
    pass


# observables
class LengthMismatch(CwdmdError):
    pass


class DtNotOnGrid(CwdmdError):
    pass


# edmd
class ShapeMismatch(CwdmdError):
    pass


class AllSingularValuesTruncated(CwdmdError):
    pass


class EigenFailure(CwdmdError):
    pass


class EmptySpectrum(CwdmdError):
    pass


class IndexOutOfRange(CwdmdError):
    pass


class ColumnMappingMissing(CwdmdError):
    pass


class ZeroAnchor(CwdmdError):
    pass


# resolvent
class SchemeMismatch(CwdmdError):
    pass


class InvalidSpectralPoint(CwdmdError):
    pass


class ZeroFrequency(CwdmdError):
    pass
