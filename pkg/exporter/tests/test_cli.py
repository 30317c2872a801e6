"""Command line behavior: flags, outputs, and exit codes."""

import json

import numpy as np
import pytest

from predexport.cli import main


def write_npy(path, array):
    np.save(path, np.asarray(array, dtype=np.float64))
    return str(path)


def export_args(source, out, dataset="demo", model="M", init=1, extra=()):
    return [
        "export",
        "--dataset-id", dataset,
        "--model-id", model,
        "--init", str(init),
        "--npy-or-csv", str(source),
        "--out", str(out),
        *extra,
    ]


class TestExportCommand:
    def test_npy_source_happy_path(self, tmp_path, capsys):
        source = write_npy(tmp_path / "run.npy", [[0.6, 0.4], [0.1, 0.9]])
        out = tmp_path / "out"
        assert main(export_args(source, out)) == 0
        line = capsys.readouterr().out.strip()
        assert line == f"exported M#1 -> {out / 'M_1.csv'}"
        assert (out / "M_1.csv").read_text(encoding="utf-8") == "0.6,0.4\n0.1,0.9\n"
        raw = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert raw["dataset_id"] == "demo"
        assert raw["runs"] == [{"model_id": "M", "init_index": 1, "path": "M_1.csv"}]

    def test_csv_source_happy_path(self, tmp_path, capsys):
        source = tmp_path / "run.csv"
        source.write_text("2.0,0.0\n", encoding="utf-8")
        out = tmp_path / "out"
        assert main(export_args(source, out)) == 0
        row = (out / "M_1.csv").read_text(encoding="utf-8").strip().split(",")
        assert float(row[0]) == pytest.approx(0.8808, abs=1e-4)

    def test_kind_override_forces_softmax(self, tmp_path):
        source = write_npy(tmp_path / "run.npy", [[0.7, 0.3]])
        out = tmp_path / "out"
        assert main(export_args(source, out, extra=("--kind", "logits"))) == 0
        row = (out / "M_1.csv").read_text(encoding="utf-8").strip().split(",")
        assert float(row[0]) == pytest.approx(0.5987, abs=1e-4)

    def test_successive_exports_share_a_manifest(self, tmp_path):
        out = tmp_path / "out"
        for model, init in (("B", 1), ("A", 2), ("A", 1)):
            source = write_npy(tmp_path / f"{model}{init}.npy", [[0.6, 0.4]])
            assert main(export_args(source, out, model=model, init=init)) == 0
        raw = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert [(r["model_id"], r["init_index"]) for r in raw["runs"]] == [
            ("A", 1),
            ("A", 2),
            ("B", 1),
        ]

    def test_non_finite_source_exits_2(self, tmp_path, capsys):
        source = write_npy(tmp_path / "run.npy", [[float("nan"), 1.0]])
        assert main(export_args(source, tmp_path / "out")) == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_duplicate_run_exits_2(self, tmp_path, capsys):
        source = write_npy(tmp_path / "run.npy", [[0.6, 0.4]])
        out = tmp_path / "out"
        assert main(export_args(source, out)) == 0
        assert main(export_args(source, out)) == 2
        assert "duplicate" in capsys.readouterr().err

    def test_unknown_suffix_exits_2(self, tmp_path, capsys):
        source = tmp_path / "weights.ckpt"
        source.write_text("", encoding="utf-8")
        assert main(export_args(source, tmp_path / "out")) == 2
        assert ".npy or .csv" in capsys.readouterr().err

    def test_missing_source_file_exits_2(self, tmp_path, capsys):
        assert main(export_args(tmp_path / "absent.npy", tmp_path / "out")) == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_init_zero_exits_2(self, tmp_path, capsys):
        source = write_npy(tmp_path / "run.npy", [[0.6, 0.4]])
        assert main(export_args(source, tmp_path / "out", init=0)) == 2
        assert "init_index" in capsys.readouterr().err

    def test_missing_required_flag_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["export", "--model-id", "M"])
        assert exc.value.code == 2
        capsys.readouterr()

    def test_bad_kind_is_usage_error(self, tmp_path, capsys):
        source = write_npy(tmp_path / "run.npy", [[0.6, 0.4]])
        with pytest.raises(SystemExit) as exc:
            main(export_args(source, tmp_path / "out", extra=("--kind", "softmaxed")))
        assert exc.value.code == 2
        capsys.readouterr()
