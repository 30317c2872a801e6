"""Per-run softmax prediction matrices and their interchange format.

A *run* is one trained initialization of one model architecture.  Its
predictions for a dataset are an N x C row-stochastic matrix: row *i* is the
softmax distribution for gold example *i*, column *j* is label *j* of the
label space.

Interchange format (training-system agnostic):

* manifest: JSON ``{"dataset_id": ..., "runs": [{"model_id", "init_index",
  "path"}, ...]}``; relative paths resolve against the manifest's directory.
* matrix: headerless UTF-8 CSV of decimal probabilities.  Values are written
  with ``repr`` (shortest form that round-trips, at most 17 significant
  digits) so matrices survive the write/read cycle bit-exactly.

Rows whose sum drifts from 1 by at most ``ROW_SUM_TOLERANCE`` (float32 noise
from external frameworks) are silently renormalized; anything worse is
rejected.  Loaded objects are immutable and safe to share across threads.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .corpus import GoldSet, IntentLabel, LabelSpace
from .errors import (
    DatasetMismatchError,
    DuplicateRunIdError,
    IndexOutOfRangeError,
    MatrixFormatError,
    NegativeProbabilityError,
    ParseError,
    RowSumViolationError,
    ShapeMismatchError,
)

ROW_SUM_TOLERANCE = 1e-6


class RunId(NamedTuple):
    model_id: str
    init_index: int

    def __str__(self) -> str:
        return f"{self.model_id}#{self.init_index}"


class Vote(NamedTuple):
    """A predicted label together with the softmax score backing it."""

    label: IntentLabel
    confidence: float


@dataclass(frozen=True)
class ManifestEntry:
    model_id: str
    init_index: int
    path: str

    @property
    def run_id(self) -> RunId:
        return RunId(self.model_id, self.init_index)


@dataclass(frozen=True, eq=False)
class PredictionRun:
    """One run's validated, renormalized probability matrix."""

    run_id: RunId
    dataset_id: str
    matrix: np.ndarray  # (N, C) float64, rows sum to 1, read-only
    labels: LabelSpace

    def __post_init__(self):
        self.matrix.flags.writeable = False

    @property
    def n_examples(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_labels(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class RunSet:
    """All runs for one dataset, grouped by model architecture."""

    dataset_id: str
    runs: tuple[PredictionRun, ...]
    by_model: dict[str, tuple[PredictionRun, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        seen: set[RunId] = set()
        groups: dict[str, list[PredictionRun]] = {}
        for run in self.runs:
            if run.run_id in seen:
                raise DuplicateRunIdError(f"duplicate run id {run.run_id}")
            seen.add(run.run_id)
            if run.dataset_id != self.dataset_id:
                raise DatasetMismatchError(
                    f"run {run.run_id} is for {run.dataset_id!r}, not {self.dataset_id!r}"
                )
            groups.setdefault(run.run_id.model_id, []).append(run)
        shapes = {run.matrix.shape for run in self.runs}
        if len(shapes) > 1:
            raise ShapeMismatchError(f"runs disagree on matrix shape: {sorted(shapes)}")
        by_model = {
            model: tuple(sorted(group, key=lambda r: r.run_id.init_index))
            for model, group in groups.items()
        }
        object.__setattr__(self, "by_model", by_model)

    def model_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.by_model))

    def run(self, run_id: RunId) -> PredictionRun:
        for candidate in self.by_model.get(run_id.model_id, ()):
            if candidate.run_id == run_id:
                return candidate
        raise KeyError(run_id)


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding, with coordinates when they exist."""

    code: str
    message: str
    path: str | None = None
    row: int | None = None
    col: int | None = None

    def render(self) -> str:
        coords = ""
        if self.row is not None:
            coords = f" (row={self.row}" + (f", col={self.col}" if self.col is not None else "") + ")"
        return f"{self.path or '<input>'}: [{self.code}] {self.message}{coords}"


# --- matrix file I/O -------------------------------------------------------


def format_probability(value: float) -> str:
    """Shortest decimal text that parses back to exactly this float."""
    return repr(float(value))


def write_matrix_csv(matrix: np.ndarray, path: str) -> None:
    array = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for row in array:
            handle.write(",".join(format_probability(v) for v in row))
            handle.write("\n")


def read_matrix_csv(path: str) -> np.ndarray:
    """Parse a headerless CSV of probabilities.  Rows must be rectangular."""
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
                raise ShapeMismatchError(
                    f"{path}:{lineno}: row has {len(cells)} cells, expected {width}"
                )
            try:
                rows.append([float(cell) for cell in cells])
            except ValueError as exc:
                raise MatrixFormatError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise MatrixFormatError(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.float64)


# --- validation ------------------------------------------------------------


def validate_matrix(
    matrix: np.ndarray,
    n_examples: int,
    n_labels: int,
    path: str | None = None,
) -> list[Diagnostic]:
    """Collect every shape/range/row-sum violation (does not stop at the first)."""
    problems: list[Diagnostic] = []
    if matrix.ndim != 2 or matrix.shape != (n_examples, n_labels):
        problems.append(
            Diagnostic(
                code="shape-mismatch",
                message=f"matrix is {matrix.shape[0]}x{matrix.shape[1] if matrix.ndim == 2 else '?'}, "
                f"expected {n_examples}x{n_labels}",
                path=path,
            )
        )
        return problems  # row checks are meaningless on the wrong shape
    for row, col in zip(*np.nonzero(matrix < 0.0)):
        problems.append(
            Diagnostic(
                code="negative-probability",
                message=f"negative probability {matrix[row, col]!r}",
                path=path,
                row=int(row),
                col=int(col),
            )
        )
    sums = matrix.sum(axis=1)
    for row in np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE)[0]:
        problems.append(
            Diagnostic(
                code="row-sum",
                message=f"row sums to {sums[row]!r}, outside tolerance {ROW_SUM_TOLERANCE}",
                path=path,
                row=int(row),
            )
        )
    return problems


def _normalize(matrix: np.ndarray) -> np.ndarray:
    sums = matrix.sum(axis=1, keepdims=True)
    return matrix / sums


# --- loading ---------------------------------------------------------------


def load_manifest(path: str) -> tuple[str, list[ManifestEntry]]:
    """Read a manifest; relative run paths are resolved against its directory."""
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(str(exc), path=path) from exc
    if not isinstance(raw, dict) or "dataset_id" not in raw or "runs" not in raw:
        raise ParseError("manifest must have 'dataset_id' and 'runs'", path=path)
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    seen: set[RunId] = set()
    for i, item in enumerate(raw["runs"]):
        try:
            entry = ManifestEntry(
                model_id=str(item["model_id"]),
                init_index=int(item["init_index"]),
                path=os.path.join(base, item["path"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"runs[{i}]: {exc!r}", path=path) from exc
        if entry.init_index < 1:
            raise ParseError(f"runs[{i}]: init_index must be >= 1", path=path)
        if entry.run_id in seen:
            raise DuplicateRunIdError(f"{path}: duplicate run id {entry.run_id}")
        seen.add(entry.run_id)
        entries.append(entry)
    return str(raw["dataset_id"]), entries


def load_run(
    entry: ManifestEntry,
    gold: GoldSet,
    labels: LabelSpace,
    dataset_id: str | None = None,
) -> PredictionRun:
    """Load and validate one run's matrix against the gold set.

    ``dataset_id`` is the manifest's declared dataset; when given it must
    match the gold set.  Rows within tolerance of 1 are renormalized exactly
    once; rows outside it raise RowSumViolationError.
    """
    if dataset_id is not None and dataset_id != gold.dataset_id:
        raise DatasetMismatchError(
            f"manifest dataset {dataset_id!r} does not match gold set {gold.dataset_id!r}"
        )
    matrix = read_matrix_csv(entry.path)
    problems = validate_matrix(matrix, len(gold), len(labels), path=entry.path)
    if problems:
        first = problems[0]
        if first.code == "shape-mismatch":
            raise ShapeMismatchError(first.render())
        if first.code == "negative-probability":
            raise NegativeProbabilityError(
                first.row, first.col, float(matrix[first.row, first.col]), entry.path
            )
        raise RowSumViolationError(first.row, float(matrix[first.row].sum()), entry.path)
    return PredictionRun(
        run_id=entry.run_id,
        dataset_id=gold.dataset_id,
        matrix=_normalize(matrix),
        labels=labels,
    )


def load_runset(manifest_path: str, gold: GoldSet, labels: LabelSpace) -> RunSet:
    dataset_id, entries = load_manifest(manifest_path)
    runs = tuple(load_run(entry, gold, labels, dataset_id=dataset_id) for entry in entries)
    return RunSet(dataset_id=gold.dataset_id, runs=runs)


def save_runset(runs: RunSet, out_dir: str, manifest_name: str = "manifest.json") -> str:
    """Write every matrix plus a manifest under ``out_dir``; returns manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for run in runs.runs:
        filename = f"{run.run_id.model_id}_{run.run_id.init_index}.csv"
        write_matrix_csv(run.matrix, os.path.join(out_dir, filename))
        entries.append(
            {
                "model_id": run.run_id.model_id,
                "init_index": run.run_id.init_index,
                "path": filename,
            }
        )
    entries.sort(key=lambda e: (e["model_id"], e["init_index"]))
    manifest_path = os.path.join(out_dir, manifest_name)
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump({"dataset_id": runs.dataset_id, "runs": entries}, handle, indent=2)
        handle.write("\n")
    return manifest_path


# --- votes -----------------------------------------------------------------


def argmax_vote(run: PredictionRun, example_index: int) -> Vote:
    """The run's predicted label and its softmax score for one example.

    Exact probability ties break to the lowest column index.
    """
    if not 0 <= example_index < run.n_examples:
        raise IndexOutOfRangeError(
            f"example index {example_index} out of range for {run.n_examples} examples"
        )
    row = run.matrix[example_index]
    col = int(np.argmax(row))  # first occurrence wins on ties
    return Vote(run.labels.labels[col], float(row[col]))


def argmax_table(run: PredictionRun) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized argmax_vote over all examples: (label columns, confidences)."""
    cols = np.argmax(run.matrix, axis=1)
    confs = run.matrix[np.arange(run.n_examples), cols]
    return cols, confs


def iter_votes(run: PredictionRun) -> Iterator[Vote]:
    cols, confs = argmax_table(run)
    for col, conf in zip(cols, confs):
        yield Vote(run.labels.labels[int(col)], float(conf))
