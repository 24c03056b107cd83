import json
import subprocess
import sys

import pytest

from vislim import checkpoint
from vislim.cli import main

FAST_CONFIG = {
    "scenario": {"spec": "shear-bump"},
    "epsilons": [0.1],
    "T": 0.02,
    "grids": {"nx": 16, "ny": 96, "nz": 64, "n_store": 8, "y_max": 4.0},
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(FAST_CONFIG))
    return p


def test_missing_config_is_config_error(tmp_path):
    rc = main(["sweep", "--config", str(tmp_path / "nope.json"),
               "--out", str(tmp_path)])
    assert rc == 2


def test_invalid_json_is_config_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_unknown_key_is_config_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"scenario": {"spec": "rest"},
                             "epsilons": [0.1], "wat": 1}))
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_verify_lemmas_writes_jsonl(cfg_path, tmp_path):
    out = tmp_path / "out"
    assert main(["verify-lemmas", "--config", str(cfg_path),
                 "--out", str(out)]) == 0
    lines = (out / "lemmas.jsonl").read_text().splitlines()
    recs = [json.loads(l) for l in lines]
    assert len(recs) == 300
    assert all(r["pass"] for r in recs)


def test_solve_euler_writes_checkpoints(cfg_path, tmp_path):
    out = tmp_path / "out"
    assert main(["solve-euler", "--config", str(cfg_path),
                 "--out", str(out)]) == 0
    states, meta = checkpoint.read_states(out / "euler0.ckpt")
    assert len(states) == 9
    assert meta["grid"].nx == 16


def test_build_ansatz_writes_residual_report(cfg_path, tmp_path):
    out = tmp_path / "out"
    assert main(["build-ansatz", "--config", str(cfg_path),
                 "--out", str(out)]) == 0
    rows = json.loads((out / "residual_eps0.1.json").read_text())
    assert rows[0]["epsilon"] == 0.1
    assert "R_u_L2" in rows[0]["norms"]


def test_console_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "vislim.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sweep" in proc.stdout
