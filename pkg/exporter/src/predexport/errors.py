"""Error taxonomy.

Everything the exporter can raise on bad input derives from ExportError, so
callers embedding it can catch one class.  Plain ValueError is reserved for
contract violations the caller asserted away (an explicit --kind that the
data contradicts, unreadable source files, malformed manifests).
"""


class ExportError(Exception):
    """Base class for exporter failures."""


class NonFiniteValueError(ExportError):
    """The source array contains NaN or an infinity."""


class AmbiguousShapeError(ExportError):
    """The source cannot be read as a single N x C prediction matrix."""


class DuplicateRunIdError(ExportError):
    """Two manifest entries share (model_id, init_index)."""


class DatasetMismatchError(ExportError):
    """Manifest entries declare different dataset ids."""
