"""Adapter from training-framework outputs to the evaluation engine's files.

Converts per-run softmax matrices (in-memory arrays, ``.npy`` dumps, or raw
CSVs) into the headerless probability CSV plus JSON manifest that the
``layervote`` engine ingests, detecting and softmaxing logits on the way.
"""

from .errors import (
    AmbiguousShapeError,
    DatasetMismatchError,
    DuplicateRunIdError,
    ExportError,
    NonFiniteValueError,
)
from .export import (
    KIND_AUTO,
    KIND_LOGITS,
    KIND_PROBABILITIES,
    KINDS,
    MANIFEST_NAME,
    ROW_SUM_DETECTION_TOLERANCE,
    ExportJob,
    ManifestEntry,
    coerce_matrix,
    detect_kind,
    export_run,
    merge_manifests,
    read_manifest_entries,
    softmax_rows,
    to_probabilities,
    write_matrix_csv,
)

__all__ = [
    "AmbiguousShapeError",
    "DatasetMismatchError",
    "DuplicateRunIdError",
    "ExportError",
    "NonFiniteValueError",
    "KIND_AUTO",
    "KIND_LOGITS",
    "KIND_PROBABILITIES",
    "KINDS",
    "MANIFEST_NAME",
    "ROW_SUM_DETECTION_TOLERANCE",
    "ExportJob",
    "ManifestEntry",
    "coerce_matrix",
    "detect_kind",
    "export_run",
    "merge_manifests",
    "read_manifest_entries",
    "softmax_rows",
    "to_probabilities",
    "write_matrix_csv",
]

__version__ = "0.1.0"
