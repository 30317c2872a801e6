"""Exception types raised across the package.

Every error carries a human-readable message; loaders additionally carry
file/row coordinates where they are known so CLI diagnostics can point at
the offending cell.
"""


class LayervoteError(Exception):
    """Base class for all errors raised by this package."""


# --- corpus ---------------------------------------------------------------


class CorpusError(LayervoteError):
    pass


class EmptyComponentError(CorpusError):
    """A multi-intent annotation contained an empty component."""


class ReservedSeparatorError(CorpusError):
    """A label component contained the reserved '+' separator."""


class DuplicateComponentError(CorpusError):
    """The same component appeared twice in one multi-intent annotation."""


class ParseError(CorpusError):
    """A corpus or sidecar file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path or '<input>'}" + (f":{line}" if line is not None else "")
        super().__init__(f"{where}: {message}")


class UnknownLabelError(CorpusError):
    """A gold label is absent from the declared label space."""


class DuplicateExampleIdError(CorpusError):
    """Two corpus rows share an example id."""


# --- prediction store -----------------------------------------------------


class StoreError(LayervoteError):
    pass


class ShapeMismatchError(StoreError):
    """Matrix dimensions disagree with the gold set / label space."""


class RowSumViolationError(StoreError):
    """A probability row does not sum to 1 within tolerance."""

    def __init__(self, row: int, total: float, path: str | None = None):
        self.row = row
        self.total = total
        self.path = path
        super().__init__(f"row {row} sums to {total!r}, outside tolerance (path={path})")


class NegativeProbabilityError(StoreError):
    """A matrix cell is negative."""

    def __init__(self, row: int, col: int, value: float, path: str | None = None):
        self.row = row
        self.col = col
        self.value = value
        self.path = path
        super().__init__(f"negative probability {value!r} at row {row}, col {col} (path={path})")


class MatrixFormatError(StoreError):
    """A matrix file contains a non-numeric or malformed cell."""


class DatasetMismatchError(StoreError):
    """Two inputs that must describe the same dataset do not."""


class DuplicateRunIdError(StoreError):
    """Two runs share (model_id, init_index)."""


class IndexOutOfRangeError(StoreError, IndexError):
    """An example index is outside the gold set."""


# --- combiner -------------------------------------------------------------


class CombinerError(LayervoteError):
    pass


class EmptyVoteListError(CombinerError):
    """The combiner was given no votes."""


class MissingRunError(CombinerError):
    """A first-layer ensemble references a run absent from the run set."""


class MissingMemberVoteError(CombinerError):
    """A second-layer member has no first-layer vote."""


# --- enumeration ----------------------------------------------------------


class EnumerationError(LayervoteError):
    pass


class TooFewModelsError(EnumerationError):
    """Fewer models than the minimum ensemble size."""


class NoMatchingEnsembleError(EnumerationError):
    """No enumerated ensemble satisfies the given predicate."""


# --- metrics --------------------------------------------------------------


class MetricsError(LayervoteError):
    pass


class LengthMismatchError(MetricsError):
    """Prediction and gold sequences differ in length."""


class EmptyConstituentsError(MetricsError):
    """A gain was requested over an empty constituent list."""


# --- toy models -----------------------------------------------------------


class ToyModelError(LayervoteError):
    pass


class EmptyTrainSetError(ToyModelError):
    """Training requested on an empty gold set."""


class DegenerateLabelSpaceError(ToyModelError):
    """Synthetic generation needs at least two classes."""


# --- reports --------------------------------------------------------------


class MissingFixtureError(LayervoteError):
    """A required reference-score fixture file is absent."""
