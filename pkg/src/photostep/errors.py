"""Exception hierarchy.

Every error raised for bad data or bad parameters derives from
:class:`PhotostepError`; the CLI maps those to exit code 1.
"""


class PhotostepError(Exception):
    """Base class for all domain errors."""


class InputError(PhotostepError, ValueError):
    """Input data violates an operation's precondition."""


class ParameterError(PhotostepError, ValueError):
    """A tuning parameter is outside its valid range."""


class AlignmentError(PhotostepError):
    """Streams cannot be placed on a common time grid."""


class RangeError(PhotostepError, IndexError):
    """A requested time range falls outside the available data."""


class ShapeError(PhotostepError, ValueError):
    """Sequences have incompatible shapes."""


class NoMatchError(PhotostepError):
    """Every fingerprint was pruned; there is nothing to vote on."""


class MetricError(PhotostepError):
    """A metric is undefined for the given input (e.g. empty ground truth)."""


class ParseError(PhotostepError):
    """A file could not be parsed.

    ``line`` is the 1-based line number of the offending line, when known.
    """

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f"{':' if where else 'line '}{line}"
        super().__init__(f"{where}: {message}" if where else message)


class IncompatibleVersionError(ParseError):
    """A persisted file was written by an unsupported format version."""
