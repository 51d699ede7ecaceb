"""
Exception types raised by ksion.

Every error derives from ``KsionError``; most also derive from the builtin
they specialize so that callers may catch either.
"""


class KsionError(Exception):
    """Base class for all ksion errors."""


class DimensionError(KsionError, ValueError):
    """Operator, state or subsystem shapes do not match."""


class ParameterError(KsionError, ValueError):
    """A parameter or configuration value is out of its allowed range."""


class TruncationError(KsionError, RuntimeError):
    """The phonon Fock-space cutoff is too small for the requested evolution."""


class EstimationError(KsionError, ValueError):
    """An estimate cannot be formed from the given data."""


class MissingContextError(EstimationError):
    """A context (or a marginal belonging to it) is absent."""


class ZeroProbabilityError(KsionError, ValueError):
    """Projection onto a measurement branch that has zero probability."""


class IngestError(KsionError, ValueError):
    """A trial file does not follow the documented format."""

    def __init__(self, msg, line_number=None, path=None):
        self.line_number = line_number
        self.path = path
        where = ""
        if path is not None:
            where += "%s" % path
        if line_number is not None:
            where += ":%d" % line_number
        super().__init__("%s: %s" % (where, msg) if where else msg)
