import filecmp
import json

import numpy as np
import pytest

from vqclass.cli import main
from vqclass.dataio import load_csv, load_model, save_csv, synth_blobs


def run_cli(argv):
    """Invoke the CLI in-process; argparse usage errors surface as exit 2."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


TRAIN_SYNTH = [
    "train", "--synth", "blobs", "--synth-n", "10", "--synth-dim", "8",
    "--qubits", "3", "--layers", "1", "--epochs", "3", "--seed", "0",
]


class TestTrain:
    def test_synth_end_to_end_writes_model_and_log(self, tmp_path, capsys):
        model_path = tmp_path / "model.vqc"
        log_path = tmp_path / "log.jsonl"
        code = run_cli(TRAIN_SYNTH + ["--out", str(model_path),
                                      "--log", str(log_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("config:")
        assert "final: epoch=3" in out
        assert f"wrote model to {model_path}" in out
        model = load_model(model_path)
        assert model.n_layers == 1
        lines = log_path.read_text().strip().split("\n")
        assert len(lines) == 3
        assert json.loads(lines[0])["epoch"] == 1

    def test_train_csv_input(self, tmp_path, capsys):
        data_path = tmp_path / "train.csv"
        save_csv(synth_blobs(8, 8, 10.0, 1), data_path)
        code = run_cli(["train", "--train", str(data_path), "--qubits", "3",
                        "--layers", "1", "--epochs", "2",
                        "--out", str(tmp_path / "m.vqc")])
        assert code == 0

    def test_missing_input_file_is_runtime_error(self, tmp_path, capsys):
        missing = tmp_path / "nope.csv"
        code = run_cli(["train", "--train", str(missing),
                        "--out", str(tmp_path / "m.vqc")])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "nope.csv" in err

    def test_negative_margin_is_usage_error(self, tmp_path, capsys):
        code = run_cli(TRAIN_SYNTH + ["--margin", "-1",
                                      "--out", str(tmp_path / "m.vqc")])
        assert code == 2

    def test_train_and_synth_are_mutually_exclusive(self, tmp_path, capsys):
        code = run_cli(["train", "--train", "a.csv", "--synth", "blobs",
                        "--out", str(tmp_path / "m.vqc")])
        assert code == 2

    def test_one_data_source_required(self, tmp_path, capsys):
        code = run_cli(["train", "--out", str(tmp_path / "m.vqc")])
        assert code == 2

    def test_val_fraction_split(self, tmp_path, capsys):
        code = run_cli(TRAIN_SYNTH + ["--val-fraction", "0.25",
                                      "--out", str(tmp_path / "m.vqc")])
        assert code == 0
        assert "val_loss=" in capsys.readouterr().out

    def test_early_stopping_needs_validation(self, tmp_path, capsys):
        code = run_cli(TRAIN_SYNTH + ["--patience", "2",
                                      "--out", str(tmp_path / "m.vqc")])
        assert code == 2


class TestEvalAndPredict:
    @pytest.fixture()
    def trained(self, tmp_path):
        data_path = tmp_path / "data.csv"
        save_csv(synth_blobs(8, 8, 10.0, 2), data_path)
        model_path = tmp_path / "model.vqc"
        assert run_cli(TRAIN_SYNTH + ["--out", str(model_path)]) == 0
        return model_path, data_path

    def test_eval_prints_table_and_writes_json(self, trained, tmp_path,
                                               capsys):
        model_path, data_path = trained
        capsys.readouterr()  # drop train output
        json_path = tmp_path / "report.json"
        code = run_cli(["eval", "--model", str(model_path),
                        "--data", str(data_path), "--json", str(json_path)])
        assert code == 0
        out = capsys.readouterr().out
        for name in ("none", "infection", "ischaemia", "both", "macro"):
            assert name in out
        record = json.loads(json_path.read_text())
        assert record["n_samples"] == 32
        assert len(record["confusion"]) == 4

    def test_eval_dimension_mismatch(self, trained, tmp_path, capsys):
        model_path, _ = trained
        wrong = tmp_path / "wrong.csv"
        save_csv(synth_blobs(3, 4, 5.0, 0), wrong)
        capsys.readouterr()
        code = run_cli(["eval", "--model", str(model_path),
                        "--data", str(wrong)])
        assert code == 1
        err = capsys.readouterr().err
        assert "dimension" in err or "feature" in err

    def test_predict_prints_label_and_four_scores(self, trained, capsys):
        model_path, data_path = trained
        capsys.readouterr()
        code = run_cli(["predict", "--model", str(model_path),
                        "--data", str(data_path)])
        assert code == 0
        lines = [l for l in capsys.readouterr().out.split("\n")
                 if l and not l.startswith("config:")]
        assert len(lines) == 32
        for line in lines:
            parts = line.split()
            assert parts[0] in ("none", "infection", "ischaemia", "both")
            assert len(parts) == 5
            for p in parts[1:]:
                float(p)

    def test_predict_empty_data(self, trained, tmp_path, capsys):
        model_path, _ = trained
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        capsys.readouterr()
        code = run_cli(["predict", "--model", str(model_path),
                        "--data", str(empty)])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")


class TestGradcheck:
    def test_passes_and_is_deterministic(self, capsys):
        argv = ["gradcheck", "--trials", "3", "--qubits", "3",
                "--layers", "1", "--seed", "0"]
        assert run_cli(argv) == 0
        first = capsys.readouterr().out
        assert "max |Δ|" in first
        assert "PASS" in first
        assert run_cli(argv) == 0
        assert capsys.readouterr().out == first

    def test_zero_trials_is_usage_error(self, capsys):
        assert run_cli(["gradcheck", "--trials", "0"]) == 2


class TestSynth:
    def test_writes_loadable_csv(self, tmp_path, capsys):
        out = tmp_path / "blobs.csv"
        code = run_cli(["synth", "--n-per-class", "5", "--dim", "6",
                        "--separation", "4.0", "--seed", "3",
                        "--out", str(out)])
        assert code == 0
        data = load_csv(out)
        assert len(data) == 20
        assert data.feature_dim == 6
        reference = synth_blobs(5, 6, 4.0, 3)
        np.testing.assert_array_equal(data.features, reference.features)


class TestConfigFile:
    def test_config_sets_defaults_flags_override(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"layers": 2, "epochs": 1}))
        model_path = tmp_path / "model.vqc"
        code = run_cli(["train", "--synth", "blobs", "--synth-n", "5",
                        "--qubits", "3", "--config", str(config),
                        "--layers", "1",  # explicit flag beats config
                        "--out", str(model_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert load_model(model_path).n_layers == 1
        assert "epochs=1" in out  # config value survived as the default

    def test_unknown_config_key(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"warp_speed": 9}))
        code = run_cli(TRAIN_SYNTH + ["--config", str(config),
                                      "--out", str(tmp_path / "m.vqc")])
        assert code == 2

    def test_invalid_config_json(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text("{not json")
        code = run_cli(TRAIN_SYNTH + ["--config", str(config),
                                      "--out", str(tmp_path / "m.vqc")])
        assert code == 2


class TestDeterminism:
    def test_identical_runs_produce_identical_artifacts(self, tmp_path,
                                                        capsys):
        data_path = tmp_path / "data.csv"
        save_csv(synth_blobs(8, 8, 10.0, 5), data_path)
        outputs = []
        for name in ("a", "b"):
            model_path = tmp_path / f"model_{name}.vqc"
            json_path = tmp_path / f"report_{name}.json"
            assert run_cli(["train", "--train", str(data_path),
                            "--qubits", "3", "--layers", "1",
                            "--epochs", "3", "--seed", "9",
                            "--out", str(model_path)]) == 0
            assert run_cli(["eval", "--model", str(model_path),
                            "--data", str(data_path),
                            "--json", str(json_path)]) == 0
            outputs.append(capsys.readouterr().out)
        assert filecmp.cmp(tmp_path / "model_a.vqc", tmp_path / "model_b.vqc",
                           shallow=False)
        assert filecmp.cmp(tmp_path / "report_a.json",
                           tmp_path / "report_b.json", shallow=False)
        # stdout differs only by the file names embedded in it
        normalized = [
            out.replace(f"model_{name}", "model").replace(
                f"report_{name}", "report")
            for name, out in zip(("a", "b"), outputs)
        ]
        assert normalized[0] == normalized[1]
