"""Config file parsing, scenario strings, and the CLI subcommands."""

import json

import pytest

from mlcil.cli import main
from mlcil.config import parse_config, parse_scenario
from mlcil.errors import ConfigError


def run_overrides():
    """Small overrides so CLI tests finish quickly."""
    sets = {"num_classes": 6, "feature_dim": 5, "base": 2, "increment": 2,
            "hidden_dim": 4, "train_samples": 60, "test_samples": 40,
            "epochs": 2, "batch_size": 16}
    out = []
    for key, value in sets.items():
        out += ["--set", f"{key}={value}"]
    return out


# -- scenario strings -----------------------------------------------------------

def test_parse_scenario():
    assert parse_scenario("B4-C2") == (4, 2)
    assert parse_scenario("b0-c5") == (0, 5)
    assert parse_scenario("B10C3") == (10, 3)
    for bad in ("B4", "C2", "4-2", "B-C", "Bx-Cy"):
        with pytest.raises(ConfigError):
            parse_scenario(bad)


# -- config files -----------------------------------------------------------------

def test_parse_config_defaults_and_file(tmp_path):
    assert parse_config().alpha == 1.2
    path = tmp_path / "run.ini"
    path.write_text("[schedule]\nbase = 4\nincrement = 2\n"
                    "[loss]\nalpha = 0.6\n"
                    "[data]\ndrop_task_negatives = true\n")
    cfg = parse_config(path)
    assert cfg.base == 4 and cfg.increment == 2
    assert cfg.alpha == 0.6
    assert cfg.drop_task_negatives is True


def test_overrides_win_over_file_values(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[loss]\nalpha = 0.6\n")
    cfg = parse_config(path, ["alpha=0.9", "seed=7"])
    assert cfg.alpha == 0.9 and cfg.seed == 7


def test_parse_config_error_paths(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.ini")
    path = tmp_path / "bad.ini"
    path.write_text("[x]\nno_such_key = 1\n")
    with pytest.raises(ConfigError):
        parse_config(path)
    path.write_text("[x]\nalpha = not_a_number\n")
    with pytest.raises(ConfigError):
        parse_config(path)
    path.write_text("[x]\ndrop_task_negatives = maybe\n")
    with pytest.raises(ConfigError):
        parse_config(path)
    with pytest.raises(ConfigError):
        parse_config(None, ["alpha"])          # not key=value
    with pytest.raises(ConfigError):
        parse_config(None, ["alpha=-2"])       # fails validation


# -- subcommands -----------------------------------------------------------------

def test_run_writes_metrics_and_report(tmp_path, capsys):
    out = tmp_path / "run1"
    code = main(["run", "--method", "kd", "--seed", "1",
                 "--out", str(out), "--no-timestamp"] + run_overrides())
    assert code == 0
    assert (out / "metrics.csv").exists()
    payload = json.loads((out / "report.json").read_text())
    assert payload["config"]["variant"] == "kd"
    assert payload["seed"] == 1
    assert "timestamp" not in payload
    assert "final mAP=" in capsys.readouterr().out


def test_run_is_byte_deterministic(tmp_path):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        assert main(["run", "--method", "rebll", "--seed", "4",
                     "--out", str(d), "--no-timestamp"]
                    + run_overrides()) == 0
    assert (dirs[0] / "metrics.csv").read_bytes() == \
        (dirs[1] / "metrics.csv").read_bytes()


def test_run_honors_scenario_flag(tmp_path):
    out = tmp_path / "sc"
    assert main(["run", "--scenario", "B2-C2", "--seed", "0",
                 "--out", str(out), "--no-timestamp"]
                + run_overrides()) == 0
    payload = json.loads((out / "report.json").read_text())
    assert payload["config"]["base"] == 2
    assert len(payload["rows"]) == 3


def test_run_dump_buffer(tmp_path):
    out = tmp_path / "buf"
    assert main(["run", "--method", "rebll", "--seed", "0", "--dump-buffer",
                 "--out", str(out), "--no-timestamp"]
                + run_overrides()) == 0
    dump = (out / "buffer_dump.csv").read_text().strip().split("\n")
    assert dump[0].startswith("f0,")
    assert dump[0].endswith(",source_task")
    assert len(dump) > 1


def test_out_dir_env_var_is_honored(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv("MLCIL_OUT_DIR", str(target))
    assert main(["run", "--method", "kd", "--seed", "0", "--no-timestamp"]
                + run_overrides()) == 0
    assert (target / "metrics.csv").exists()


def test_bad_method_exits_with_error_status(tmp_path, capsys):
    code = main(["run", "--method", "nope", "--out", str(tmp_path)]
                + run_overrides())
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_ablate_writes_the_full_ladder(tmp_path, capsys):
    out = tmp_path / "ladder"
    code = main(["ablate", "--seeds", "0,1", "--out", str(out),
                 "--no-timestamp"] + run_overrides())
    assert code == 0
    lines = (out / "ladder.csv").read_text().strip().split("\n")
    assert lines[0].startswith("variant,mean_last_mAP")
    assert len(lines) == 1 + 8  # seven variants plus the fixed-decay row
    assert lines[-1].startswith("akd_fixed_decay,")


def test_gen_data_round_trips(tmp_path):
    out = tmp_path / "data"
    assert main(["gen-data", "--seed", "3", "--out", str(out)]
                + run_overrides()) == 0
    from mlcil.data import load_dataset
    train = load_dataset(out / "train.csv")
    test = load_dataset(out / "test.csv")
    assert train.num_samples == 60 and test.num_samples == 40
    assert train.num_classes == 6


def test_check_grads_subcommand(capsys):
    assert main(["check-grads", "--draws", "2", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert "composite" in out and "FAIL" not in out
