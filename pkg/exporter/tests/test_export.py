"""Unit tests for source coercion, logits detection, and run export."""

import json
import math
import os

import numpy as np
import pytest

from predexport import (
    KIND_LOGITS,
    KIND_PROBABILITIES,
    AmbiguousShapeError,
    DatasetMismatchError,
    DuplicateRunIdError,
    ExportJob,
    NonFiniteValueError,
    coerce_matrix,
    detect_kind,
    export_run,
    to_probabilities,
)


class TestCoerceMatrix:
    def test_nested_lists_become_float64(self):
        matrix = coerce_matrix([[0.6, 0.4], [0.1, 0.9]])
        assert matrix.dtype == np.float64
        assert matrix.shape == (2, 2)
        assert matrix[0, 0] == 0.6

    def test_float32_upcasts_without_extra_rounding(self):
        source = np.array([[0.1, 0.2, 0.7]], dtype=np.float32)
        matrix = coerce_matrix(source)
        assert matrix.dtype == np.float64
        # upcast is exact: every float32 is representable as a float64
        assert (matrix == source.astype(np.float64)).all()

    def test_one_dimensional_is_ambiguous(self):
        with pytest.raises(AmbiguousShapeError):
            coerce_matrix([0.6, 0.4])

    def test_zero_dimensional_is_ambiguous(self):
        with pytest.raises(AmbiguousShapeError):
            coerce_matrix(np.asarray(1.0))

    def test_three_dimensional_is_ambiguous(self):
        with pytest.raises(AmbiguousShapeError):
            coerce_matrix(np.zeros((2, 2, 2)))

    def test_no_rows_is_ambiguous(self):
        with pytest.raises(AmbiguousShapeError):
            coerce_matrix(np.zeros((0, 3)))

    def test_single_column_is_ambiguous(self):
        with pytest.raises(AmbiguousShapeError):
            coerce_matrix([[1.0], [1.0]])

    def test_nan_raises_non_finite(self):
        with pytest.raises(NonFiniteValueError, match="row 1, col 0"):
            coerce_matrix([[0.5, 0.5], [float("nan"), 1.0]])

    def test_infinity_raises_non_finite(self):
        with pytest.raises(NonFiniteValueError):
            coerce_matrix([[0.5, float("inf")]])

    def test_npy_source(self, tmp_path):
        source = np.array([[2.0, 0.0], [1.0, 1.0]])
        path = tmp_path / "logits.npy"
        np.save(path, source)
        matrix = coerce_matrix(path)
        assert (matrix == source).all()

    def test_csv_source(self, tmp_path):
        path = tmp_path / "probs.csv"
        path.write_text("0.6,0.4\n0.1,0.9\n", encoding="utf-8")
        matrix = coerce_matrix(str(path))
        assert (matrix == np.array([[0.6, 0.4], [0.1, 0.9]])).all()

    def test_csv_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "probs.csv"
        path.write_text("0.6,0.4\n\n0.1,0.9\n", encoding="utf-8")
        assert coerce_matrix(str(path)).shape == (2, 2)

    def test_csv_ragged_rows_are_ambiguous(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("0.6,0.4\n0.1,0.2,0.7\n", encoding="utf-8")
        with pytest.raises(AmbiguousShapeError):
            coerce_matrix(str(path))

    def test_csv_empty_file_is_ambiguous(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(AmbiguousShapeError):
            coerce_matrix(str(path))

    def test_csv_bad_cell_raises_value_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.6,oops\n", encoding="utf-8")
        with pytest.raises(ValueError, match="bad.csv:1"):
            coerce_matrix(str(path))

    def test_unknown_suffix_raises_value_error(self, tmp_path):
        path = tmp_path / "weights.pt"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ValueError, match="expected a .npy or .csv"):
            coerce_matrix(str(path))


class TestDetectKind:
    def test_exact_probabilities(self):
        assert detect_kind(np.array([[0.6, 0.4], [0.1, 0.9]])) == KIND_PROBABILITIES

    def test_float32_noise_still_probabilities(self):
        assert detect_kind(np.array([[0.6, 0.400004], [0.099996, 0.9]])) == KIND_PROBABILITIES

    def test_drift_within_threshold_is_probabilities(self):
        assert detect_kind(np.array([[0.5, 0.5005]])) == KIND_PROBABILITIES

    def test_drift_beyond_threshold_is_logits(self):
        assert detect_kind(np.array([[0.5, 0.5011]])) == KIND_LOGITS

    def test_any_bad_row_makes_the_whole_array_logits(self):
        assert detect_kind(np.array([[0.6, 0.4], [3.0, 1.0]])) == KIND_LOGITS

    def test_negative_cells_are_logits_even_when_rows_sum_to_one(self):
        assert detect_kind(np.array([[-1.0, 2.0]])) == KIND_LOGITS


class TestToProbabilities:
    def test_exact_rows_pass_through_bit_for_bit(self):
        source = np.array([[0.6, 0.4], [0.2, 0.8]])
        result = to_probabilities(source)
        assert (result == source).all()  # sums are exactly 1.0, so /1.0 is identity

    def test_noisy_rows_renormalize_to_unit_sums(self):
        result = to_probabilities(np.array([[0.25, 0.25, 0.4995]]))
        assert result.sum(axis=1) == pytest.approx(1.0, abs=1e-12)
        assert result[0, 0] == pytest.approx(0.25 / 0.9995)

    def test_logits_softmax_matches_hand_computation(self):
        result = to_probabilities(np.array([[2.0, 0.0]]))
        e2 = math.exp(2.0)
        assert result[0, 0] == pytest.approx(e2 / (e2 + 1.0), abs=1e-12)
        assert result[0, 1] == pytest.approx(1.0 / (e2 + 1.0), abs=1e-12)
        assert result[0, 0] == pytest.approx(0.8808, abs=1e-4)
        assert result[0, 1] == pytest.approx(0.1192, abs=1e-4)

    def test_softmax_invariant_to_constant_shift(self):
        logits = np.array([[3.0, 1.0, -2.0], [0.0, 0.5, 0.25]])
        shifted = to_probabilities(logits + 7.0)
        assert np.abs(shifted - to_probabilities(logits)).max() <= 1e-15

    def test_huge_logits_do_not_overflow(self):
        result = to_probabilities(np.array([[1000.0, 0.0]]))
        assert np.isfinite(result).all()
        assert result[0, 0] == pytest.approx(1.0)

    def test_declared_probabilities_with_negative_cell_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            to_probabilities(np.array([[-0.5, 1.5]]), kind=KIND_PROBABILITIES)

    def test_declared_probabilities_with_bad_sums_rejected(self):
        with pytest.raises(ValueError, match="summing to"):
            to_probabilities(np.array([[2.0, 2.0]]), kind=KIND_PROBABILITIES)

    def test_declared_logits_forces_softmax(self):
        # looks like probabilities, but the caller knows better
        result = to_probabilities(np.array([[0.7, 0.3]]), kind=KIND_LOGITS)
        assert result[0, 0] == pytest.approx(0.5986876601124521)
        assert result[0, 1] == pytest.approx(0.4013123398875479)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            to_probabilities(np.array([[0.5, 0.5]]), kind="softmaxed")


class TestExportRun:
    def test_pass_through_matrix_bytes(self, tmp_path):
        job = ExportJob("demo", "M", 1, [[0.6, 0.4], [0.1, 0.9]], str(tmp_path))
        matrix_path, entry = export_run(job)
        assert open(matrix_path, encoding="utf-8").read() == "0.6,0.4\n0.1,0.9\n"
        assert os.path.basename(matrix_path) == "M_1.csv"
        assert entry.path == "M_1.csv"
        assert entry.dataset_id == "demo"

    def test_creates_manifest_with_relative_path(self, tmp_path):
        export_run(ExportJob("demo", "M", 1, [[0.6, 0.4]], str(tmp_path)))
        raw = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert raw == {
            "dataset_id": "demo",
            "runs": [{"model_id": "M", "init_index": 1, "path": "M_1.csv"}],
        }

    def test_later_exports_append_in_sorted_order(self, tmp_path):
        export_run(ExportJob("demo", "B", 1, [[0.6, 0.4]], str(tmp_path)))
        export_run(ExportJob("demo", "A", 2, [[0.6, 0.4]], str(tmp_path)))
        export_run(ExportJob("demo", "A", 1, [[0.6, 0.4]], str(tmp_path)))
        raw = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert [(r["model_id"], r["init_index"]) for r in raw["runs"]] == [
            ("A", 1),
            ("A", 2),
            ("B", 1),
        ]

    def test_reexporting_same_run_is_rejected_before_writing(self, tmp_path):
        matrix_path, _ = export_run(ExportJob("demo", "M", 1, [[0.6, 0.4]], str(tmp_path)))
        with pytest.raises(DuplicateRunIdError):
            export_run(ExportJob("demo", "M", 1, [[0.9, 0.1]], str(tmp_path)))
        # the original matrix survives the rejected overwrite
        assert open(matrix_path, encoding="utf-8").read() == "0.6,0.4\n"

    def test_mixed_datasets_in_one_directory_rejected(self, tmp_path):
        export_run(ExportJob("demo", "M", 1, [[0.6, 0.4]], str(tmp_path)))
        with pytest.raises(DatasetMismatchError):
            export_run(ExportJob("other", "N", 1, [[0.6, 0.4]], str(tmp_path)))

    def test_rejected_source_leaves_directory_untouched(self, tmp_path):
        out = tmp_path / "fresh"
        with pytest.raises(NonFiniteValueError):
            export_run(ExportJob("demo", "M", 1, [[float("nan"), 1.0]], str(out)))
        assert not out.exists()

    def test_shape_and_row_order_preserved(self, tmp_path):
        rng = np.random.default_rng(42)
        logits = rng.normal(size=(17, 5)) * 4.0
        matrix_path, _ = export_run(ExportJob("demo", "M", 1, logits, str(tmp_path)))
        written = np.array(
            [[float(c) for c in line.split(",")]
             for line in open(matrix_path, encoding="utf-8").read().splitlines()]
        )
        assert written.shape == (17, 5)
        # softmax is monotone per row, so argmax must line up row by row
        assert (written.argmax(axis=1) == logits.argmax(axis=1)).all()

    def test_written_cells_parse_back_bit_exactly(self, tmp_path):
        rng = np.random.default_rng(7)
        probs = rng.dirichlet(np.ones(6), size=30)
        matrix_path, _ = export_run(ExportJob("demo", "M", 1, probs, str(tmp_path)))
        written = np.array(
            [[float(c) for c in line.split(",")]
             for line in open(matrix_path, encoding="utf-8").read().splitlines()]
        )
        expected = probs / probs.sum(axis=1, keepdims=True)
        assert (written == expected).all()

    def test_npy_and_in_memory_sources_export_identically(self, tmp_path):
        rng = np.random.default_rng(13)
        logits = rng.normal(size=(9, 4))
        npy = tmp_path / "run.npy"
        np.save(npy, logits)
        from_memory, _ = export_run(ExportJob("demo", "Mem", 1, logits, str(tmp_path / "a")))
        from_file, _ = export_run(ExportJob("demo", "Mem", 1, npy, str(tmp_path / "b")))
        assert open(from_memory, encoding="utf-8").read() == open(from_file, encoding="utf-8").read()

    def test_job_field_validation(self):
        with pytest.raises(ValueError, match="init_index"):
            ExportJob("demo", "M", 0, [[0.5, 0.5]], ".")
        with pytest.raises(ValueError, match="model_id"):
            ExportJob("demo", "", 1, [[0.5, 0.5]], ".")
        with pytest.raises(ValueError, match="dataset_id"):
            ExportJob("", "M", 1, [[0.5, 0.5]], ".")
        with pytest.raises(ValueError, match="kind"):
            ExportJob("demo", "M", 1, [[0.5, 0.5]], ".", kind="probs")
