"""Convert framework softmax outputs into the evaluation engine's files.

The evaluation engine ingests one headerless CSV of probabilities per
training run plus a JSON manifest naming every run.  This module is the
adapter that produces those files from whatever a training framework hands
back: an in-memory array, an ``.npy`` dump, or a raw CSV.  It knows nothing
about model architectures; it consumes arrays only.

Target formats (mirrored from the engine, byte for byte):

* matrix: one CSV row per example, cells written with ``repr`` (shortest
  decimal that parses back to the same float, at most 17 significant
  digits), ``\\n`` line endings.
* manifest: JSON ``{"dataset_id": ..., "runs": [{"model_id", "init_index",
  "path"}, ...]}``, runs sorted by (model_id, init_index), paths relative
  to the manifest's directory, matrix files named ``{model_id}_{init}.csv``.

Logits versus probabilities is auto-detected from row sums (threshold
``ROW_SUM_DETECTION_TOLERANCE``); rows with negative cells are never taken
for probabilities.  The detection is overridable per job because a silent
double softmax is the classic export bug.  Probability rows are
renormalized by their own sums before writing, so float32 accumulation
noise from the source framework cannot trip the engine's much stricter
row-sum validation.  Rows that already sum to exactly 1 divide by 1.0 and
are preserved bit for bit.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousShapeError,
    DatasetMismatchError,
    DuplicateRunIdError,
    NonFiniteValueError,
)

# Rows summing to 1 within this are probabilities; anything else is logits.
ROW_SUM_DETECTION_TOLERANCE = 1e-3

KIND_AUTO = "auto"
KIND_PROBABILITIES = "probabilities"
KIND_LOGITS = "logits"
KINDS = (KIND_AUTO, KIND_PROBABILITIES, KIND_LOGITS)

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class ManifestEntry:
    """One run's line in a manifest; ``path`` is relative to the manifest."""

    dataset_id: str
    model_id: str
    init_index: int
    path: str

    def __post_init__(self):
        if not self.dataset_id:
            raise ValueError("dataset_id must be non-empty")
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if self.init_index < 1:  # engine manifests are 1-based
            raise ValueError(f"init_index must be >= 1, got {self.init_index}")
        if not self.path:
            raise ValueError("path must be non-empty")


@dataclass(frozen=True, eq=False)  # eq would try to compare source arrays
class ExportJob:
    """Everything needed to export one run.

    ``source`` is an N x C array-like or a path to an ``.npy``/``.csv``
    file holding one.  ``kind`` declares what the values are; the default
    auto-detects from row sums.
    """

    dataset_id: str
    model_id: str
    init_index: int
    source: object = field(repr=False)
    output_dir: str = "."
    kind: str = KIND_AUTO

    def __post_init__(self):
        if not self.dataset_id:
            raise ValueError("dataset_id must be non-empty")
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if self.init_index < 1:
            raise ValueError(f"init_index must be >= 1, got {self.init_index}")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


# --- source loading ----------------------------------------------------------


def _read_csv_matrix(path: str) -> np.ndarray:
    rows: list[list[float]] = []
    width: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise AmbiguousShapeError(
                    f"{path}:{lineno}: row has {len(cells)} cells, expected {width}"
                )
            try:
                rows.append([float(cell) for cell in cells])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise AmbiguousShapeError(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.float64)


def coerce_matrix(source) -> np.ndarray:
    """Turn a job source into a finite float64 N x C matrix or refuse.

    Shape problems raise AmbiguousShapeError (a flat vector could be one
    row or one column; a single column gives detection nothing to work
    with).  NaN or infinity raises NonFiniteValueError.
    """
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        suffix = os.path.splitext(path)[1].lower()
        if suffix == ".npy":
            array = np.asarray(np.load(path, allow_pickle=False), dtype=np.float64)
        elif suffix == ".csv":
            array = _read_csv_matrix(path)
        else:
            raise ValueError(f"{path}: expected a .npy or .csv source file")
    else:
        array = np.asarray(source, dtype=np.float64)
    if array.ndim != 2:
        raise AmbiguousShapeError(
            f"source has shape {array.shape}, expected 2 dimensions (N examples x C labels)"
        )
    n_examples, n_labels = array.shape
    if n_examples < 1:
        raise AmbiguousShapeError("source has no rows")
    if n_labels < 2:
        raise AmbiguousShapeError(
            f"source has {n_labels} column(s); a prediction matrix needs at least 2 labels"
        )
    if not np.all(np.isfinite(array)):
        bad = int(np.flatnonzero(~np.isfinite(array))[0])
        row, col = divmod(bad, n_labels)
        raise NonFiniteValueError(
            f"non-finite value {array[row, col]!r} at row {row}, col {col}"
        )
    return array


# --- logits detection and conversion -----------------------------------------


def softmax_rows(array: np.ndarray) -> np.ndarray:
    shifted = array - array.max(axis=1, keepdims=True)  # overflow guard
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def detect_kind(array: np.ndarray) -> str:
    """Classify a finite N x C array as probabilities or logits."""
    if np.any(array < 0.0):  # probabilities are nonnegative by definition
        return KIND_LOGITS
    drift = np.abs(array.sum(axis=1) - 1.0)
    if np.all(drift <= ROW_SUM_DETECTION_TOLERANCE):
        return KIND_PROBABILITIES
    return KIND_LOGITS


def to_probabilities(array: np.ndarray, kind: str = KIND_AUTO) -> np.ndarray:
    """Resolve ``kind`` and return a row-stochastic float64 matrix.

    Declared probabilities that the data contradicts (negative cells, row
    sums off by more than the detection tolerance) raise ValueError rather
    than being silently repaired.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == KIND_AUTO:
        kind = detect_kind(array)
    if kind == KIND_LOGITS:
        return softmax_rows(array)
    if np.any(array < 0.0):
        raise ValueError("declared probabilities contain negative values; export as logits?")
    sums = array.sum(axis=1, keepdims=True)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_DETECTION_TOLERANCE):
        worst = float(sums[np.abs(sums - 1.0).argmax(), 0])
        raise ValueError(
            f"declared probabilities have a row summing to {worst!r}; export as logits?"
        )
    return array / sums


# --- output files -------------------------------------------------------------


def format_cell(value: float) -> str:
    """Shortest decimal text that parses back to exactly this float."""
    return repr(float(value))


def write_matrix_csv(matrix: np.ndarray, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for row in matrix:
            handle.write(",".join(format_cell(v) for v in row))
            handle.write("\n")


def _ordered_entries(entries: list[ManifestEntry]) -> list[ManifestEntry]:
    """Sort by (model_id, init_index); reject duplicates and mixed datasets."""
    datasets = {entry.dataset_id for entry in entries}
    if len(datasets) > 1:
        raise DatasetMismatchError(f"entries span datasets {sorted(datasets)}")
    ordered = sorted(entries, key=lambda e: (e.model_id, e.init_index))
    seen: set[tuple[str, int]] = set()
    for entry in ordered:
        key = (entry.model_id, entry.init_index)
        if key in seen:
            raise DuplicateRunIdError(f"duplicate run id {entry.model_id}#{entry.init_index}")
        seen.add(key)
    return ordered


def merge_manifests(entries, manifest_path: str) -> str:
    """Write one manifest listing every entry; returns the manifest path."""
    entries = list(entries)
    if not entries:
        raise ValueError("no entries to merge")
    ordered = _ordered_entries(entries)
    runs = [
        {"model_id": e.model_id, "init_index": e.init_index, "path": e.path}
        for e in ordered
    ]
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump({"dataset_id": ordered[0].dataset_id, "runs": runs}, handle, indent=2)
        handle.write("\n")
    return manifest_path


def read_manifest_entries(manifest_path: str) -> list[ManifestEntry]:
    """Parse an existing manifest back into entries (paths kept relative)."""
    try:
        with open(manifest_path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{manifest_path}: {exc}") from exc
    if not isinstance(raw, dict) or "dataset_id" not in raw or "runs" not in raw:
        raise ValueError(f"{manifest_path}: manifest must have 'dataset_id' and 'runs'")
    dataset_id = str(raw["dataset_id"])
    entries = []
    for i, item in enumerate(raw["runs"]):
        try:
            entries.append(
                ManifestEntry(
                    dataset_id=dataset_id,
                    model_id=str(item["model_id"]),
                    init_index=int(item["init_index"]),
                    path=str(item["path"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{manifest_path}: runs[{i}]: {exc!r}") from exc
    return entries


def export_run(job: ExportJob) -> tuple[str, ManifestEntry]:
    """Write one run's matrix CSV and fold it into the directory's manifest.

    Returns (matrix file path, manifest entry).  All validation happens
    before anything is written, so a rejected job leaves the output
    directory untouched.  The matrix keeps the source's N, C, and row
    order exactly.
    """
    matrix = to_probabilities(coerce_matrix(job.source), job.kind)
    manifest_path = os.path.join(job.output_dir, MANIFEST_NAME)
    existing = read_manifest_entries(manifest_path) if os.path.exists(manifest_path) else []
    entry = ManifestEntry(
        dataset_id=job.dataset_id,
        model_id=job.model_id,
        init_index=job.init_index,
        path=f"{job.model_id}_{job.init_index}.csv",
    )
    merged = _ordered_entries(existing + [entry])  # fail before touching files
    os.makedirs(job.output_dir, exist_ok=True)
    matrix_path = os.path.join(job.output_dir, entry.path)
    write_matrix_csv(matrix, matrix_path)
    merge_manifests(merged, manifest_path)
    return matrix_path, entry
