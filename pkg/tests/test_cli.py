import json
import math

import pytest

from maxns.cli import load_config, main
from maxns.io import read_csv
from maxns.errors import ValidationError


def _run(tmp_path, command, config=None, extra=()):
    args = [command, "--out", str(tmp_path / "out")]
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    return main(args + list(extra))


def test_spectrum_csv(tmp_path, capsys):
    assert _run(tmp_path, "spectrum", {"spectrum": {"n_max": 50}}) == 0
    header, rows = read_csv(tmp_path / "out" / "spectrum.csv")
    assert len(rows) == 50
    assert sum(h.endswith("_re") and h.startswith("l") for h in header) == 3
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["files"] == ["spectrum.csv"] and len(manifest["input_hash"]) == 64


def test_negative_kappa_exit_code(tmp_path, capsys):
    cfg = {"params": {"rho_s": 1, "a": 1, "gamma": 1, "mu": 1, "kappa": -1}}
    assert _run(tmp_path, "spectrum", cfg) == 2
    assert "params.kappa" in capsys.readouterr().err


def test_unknown_field_is_reported(tmp_path, capsys):
    assert _run(tmp_path, "ingham", {"ingham": {"T_lst": [9]}}) == 2
    assert "ingham.T_lst" in capsys.readouterr().err


def test_malformed_json(tmp_path, capsys):
    (tmp_path / "bad.json").write_text("{")
    assert main(["spectrum", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == 2


def test_null_control_default_manifest_and_determinism(tmp_path, capsys):
    cfg = {"null_control": {"n_max": 16}}
    assert _run(tmp_path, "null-control", cfg, ["--seed", "3"]) == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["files"] == ["control.csv", "summary.json"]
    first = (tmp_path / "out" / "summary.json").read_bytes()
    summary = json.loads(first)
    assert summary["terminal_error"] < 1e-8 and summary["seed"] == 3
    assert _run(tmp_path, "null-control", cfg, ["--seed", "3"]) == 0
    assert (tmp_path / "out" / "summary.json").read_bytes() == first


def test_short_ingham_horizon_rejected(tmp_path, capsys):
    # horizon below 2 pi / gap is rejected by the Ingham module
    assert _run(tmp_path, "ingham", {"ingham": {"n_max": 20, "T_list": [1.0]}}) == 2
    assert "T" in capsys.readouterr().err


def test_simulate_writes_trajectory(tmp_path, capsys):
    cfg = {"simulate": {"n_max": 8, "nx": 129, "snapshots": 3}}
    assert _run(tmp_path, "simulate", cfg) == 0
    traj = json.loads((tmp_path / "out" / "snapshot_manifest.json").read_text())
    assert len(traj["files"]) == 3 and len(traj["norms"]) == 3
    assert traj["norms"][-1] < traj["norms"][0]


def test_seed_precedence():
    cfg = {"seed": 1, "null_control": {"seed": 2}}
    assert load_config("null-control", cfg).seed == 2
    assert load_config("null-control", cfg, seed=5).seed == 5
    assert load_config("null-control", {"seed": 1}).seed == 1


def test_interval_validation():
    with pytest.raises(ValidationError, match="approx_control.O1"):
        load_config("approx-control", {"approx_control": {"O1": [0.6, 0.3]}})
    cfg = load_config("beam", {"beam": {"O2": [0, math.pi]}})
    assert cfg.block["O2"][1] == math.pi


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    from maxns import cli
    from maxns.errors import SingularGramianError

    def boom(cfg):
        raise SingularGramianError("Gramian is numerically singular", n=7)

    monkeypatch.setitem(cli.HANDLERS, "spectrum", boom)
    assert _run(tmp_path, "spectrum") == 1
    err = capsys.readouterr().err
    assert "SingularGramianError" in err and "n=7" in err
