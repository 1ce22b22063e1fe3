import pandas as pd
import pytest
from pydantic import ValidationError

from tasksampler.cli import main
from tasksampler.config import load_run_config
from tasksampler.schemas import RunConfig, SamplingStrategy

TINY_FLAGS = [
    "--iterations", "20",
    "--k-way", "3",
    "--m-shot", "2",
    "--n-query", "3",
    "--num-classes", "12",
    "--points-per-class", "20",
    "--num-superclusters", "3",
    "--dim", "6",
    "--embed-dim", "4",
    "--train-fraction", "0.75",
    "--eval-every", "10",
    "--snapshot-every", "10",
    "--eval-episodes", "10",
]


def test_train_command(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["train", *TINY_FLAGS, "--strategy", "gcp-easy", "--out", str(out)]) == 0
    assert (out / "metrics.csv").is_file()
    assert (out / "potentials_20.csv").is_file()
    assert "accuracy" in capsys.readouterr().out
    assert load_run_config(out / "config.echo").strategy is SamplingStrategy.GCP_EASY


def test_invalid_config_exits_with_one_line(tmp_path, capsys):
    code = main(["train", *TINY_FLAGS, "--m-shot", "15", "--n-query", "10", "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("error: ValidationError:")
    assert len(err.splitlines()) == 1


def test_unknown_strategy_is_rejected(tmp_path, capsys):
    assert main(["train", *TINY_FLAGS, "--strategy", "hardest", "--out", str(tmp_path)]) == 1
    assert "strategy" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("iterations=30\nk-way=4\ntau=0.25\n")
    config = load_run_config(path, {"tau": "0.75", "alpha": None})
    assert (config.iterations, config.k_way, config.tau, config.alpha) == (30, 4, 0.75, 1.0)


def test_missing_config_file(tmp_path, capsys):
    assert main(["train", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert "FileNotFoundError" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("iterationz=30\n")
    with pytest.raises(ValidationError):
        load_run_config(path)


def test_run_config_cross_checks():
    with pytest.raises(ValidationError):
        RunConfig(num_classes=10, train_fraction=0.8, k_way=5)
    with pytest.raises(ValidationError):
        RunConfig(tau=1.5)
    assert RunConfig().num_train_classes == 20


@pytest.mark.parametrize("command", ["verify-prop1", "verify-greedy"])
def test_verify_command(tmp_path, command):
    out = tmp_path / "verify"
    args = [command, "--num-classes", "4", "--k", "3", "--num-matrices", "1", "--draws", "2000", "--out", str(out)]
    assert main(args) == 0
    frame = pd.read_csv(out / "greedy_law.csv")
    assert "counterexample" in frame["matrix"].tolist()


def test_verify_command_over_the_limit(tmp_path, capsys):
    assert main(["verify-prop1", "--num-classes", "12", "--out", str(tmp_path)]) == 1
    assert "EnumerationCapError" in capsys.readouterr().err


def test_gen_data_command(tmp_path):
    assert main(["gen-data", *TINY_FLAGS, "--out", str(tmp_path)]) == 0
    dataset = pd.read_csv(tmp_path / "dataset.csv")
    assert len(dataset) == 12 * 20
    assert list(dataset.columns) == ["label"] + [f"f{i}" for i in range(6)]
    assert len(pd.read_csv(tmp_path / "superclusters.csv")) == 12


def test_bench_command(tmp_path):
    args = ["bench", *TINY_FLAGS, "--ks", "3", "--shots", "1", "--embed-dims", "4", "--bench-iterations", "3", "--warmup", "1"]
    assert main([*args, "--out", str(tmp_path)]) == 0
    assert len(pd.read_csv(tmp_path / "timing.csv")) == 1


def test_missing_subcommand_is_an_argument_error():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2
