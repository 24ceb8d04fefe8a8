import json
import logging

import numpy as np
import pandas as pd
import pytest

from ohcsvm.cli import main
from ohcsvm.reports import read_json, write_frame
from ohcsvm.synthetic import oracle_label, synth_load_paths_raw, synth_oracle_dataset

SEEDS = {"split_seed": 0, "theta_seed": 0, "adam_seed": 0, "cv_seed": 0, "synth_seed": 0}


@pytest.fixture(autouse=True)
def drop_run_log_handlers():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()


def write_config(directory, **overrides):
    data = {
        "schema_version": 1,
        "input": {"synthetic": {"n": 40}},
        "kernels": [{"name": "rbf", "kind": "rbf", "gamma": 1.0}],
        "svm": {"c_grid": [1.0, 10.0], "folds": 2},
        "curve": {"fractions": [1.0]},
        "seeds": dict(SEEDS),
    }
    data.update(overrides)
    file = directory / "config.json"
    file.write_text(json.dumps(data), encoding="utf-8")
    return file


def test_full_pipeline(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--config", str(write_config(tmp_path)), "--out", str(out)]) == 0
    assert (out / "manifest.json").is_file()
    assert (out / "metrics" / "rbf.json").is_file()
    assert (out / "run.log").read_text(encoding="utf-8").strip()
    assert "Completed" in capsys.readouterr().out


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "absent.json")]) == 2
    assert "does not exist" in capsys.readouterr().err


def test_config_is_required(capsys):
    assert main([]) == 2


def test_stage_without_upstream_exits_2(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--config", str(write_config(tmp_path)), "--out", str(out), "--stage", "fit"]) == 2
    assert "labeled.csv" in capsys.readouterr().err


def test_stage_failure_exits_1(tmp_path):
    config = write_config(tmp_path, labeling={"threshold": 0.01})
    assert main(["--config", str(config), "--out", str(tmp_path / "out")]) == 1


def test_seed_override(tmp_path):
    config = write_config(tmp_path)
    main(["--config", str(config), "--out", str(tmp_path / "a"), "--stage", "label"])
    main([
        "--config", str(config), "--out", str(tmp_path / "b"), "--stage", "label",
        "--seed-override", "split_seed=5",
    ])
    a = pd.read_csv(tmp_path / "a" / "labeled.csv")["split"]
    b = pd.read_csv(tmp_path / "b" / "labeled.csv")["split"]
    assert a.value_counts().to_dict() == b.value_counts().to_dict()
    assert not a.equals(b)


def test_bad_seed_override_exits_2(tmp_path):
    config = write_config(tmp_path)
    assert main(["--config", str(config), "--seed-override", "colour=3"]) == 2


def test_standalone_metrics(tmp_path, capsys):
    file = tmp_path / "predictions" / "mine.csv"
    file.parent.mkdir()
    pd.DataFrame({"y_true": [1, -1, 1, -1], "y_pred": [1, -1, -1, -1]}).to_csv(file, index=False)
    assert main(["--predictions", str(file)]) == 0

    summary = read_json(tmp_path / "metrics" / "mine.json")
    assert summary["metrics"]["accuracy"] == 0.75
    assert summary["metrics"]["precision"] == 1.0
    assert "absent" not in capsys.readouterr().out


def test_standalone_metrics_missing_file(tmp_path):
    assert main(["--predictions", str(tmp_path / "none.csv")]) == 2


def test_raw_schema_input(tmp_path):
    ds = synth_oracle_dataset(30, seed=2)
    write_frame(synth_load_paths_raw(ds.paths), tmp_path / "raw.csv")
    config = write_config(tmp_path, input={"files": ["raw.csv"], "format": "raw"})
    out = tmp_path / "out"
    assert main(["--config", str(config), "--out", str(out), "--stage", "label"]) == 0

    labeled = pd.read_csv(out / "labeled.csv")
    assert len(labeled) == 60
    terminal = labeled[labeled["increment"] == 1]
    eps = terminal[["eps11", "eps22", "gam12"]].to_numpy()
    assert np.array_equal(terminal["label"].to_numpy(), oracle_label(eps))
    assert (labeled[labeled["increment"] == 0]["label"] == 1).all()
