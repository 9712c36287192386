"""Exception types shared across the package."""


class MixedMAError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(MixedMAError, ValueError):
    """Operands live on different ambient spaces."""


class BidegreeError(MixedMAError, ValueError):
    """A form does not have the bidegree an operation requires."""


class ConjugateSymmetryError(MixedMAError, ValueError):
    """A density that should be real carries an imaginary residue."""


class SingularityError(MixedMAError, ValueError):
    """Evaluation requested on the zero locus of a holomorphic tuple."""


class RangeError(MixedMAError, ValueError):
    """A parameter is outside the numerically representable range."""


class ScheduleError(MixedMAError, ValueError):
    """A path schedule is malformed or has the wrong arity."""


class OracleLookupError(MixedMAError, KeyError):
    """Requested oracle or scenario name is not registered."""


class ChartMismatchError(MixedMAError, ValueError):
    """Two-chart data disagree on the overlap circle."""


class ConfigError(MixedMAError, ValueError):
    """A run configuration violates the documented schema.

    Carries the path of the offending field so the command line runner
    can print a pinpointed diagnostic.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
