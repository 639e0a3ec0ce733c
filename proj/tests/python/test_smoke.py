import json
import math
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

import rodlimit

ROOT = Path(__file__).resolve().parents[2]
CLI = os.environ.get("RODLIMIT_CLI")
SCHEMA = os.environ.get("RODLIMIT_SCHEMA", str(ROOT / "docs" / "output_schema.json"))
L_FRAME = ROOT / "configs" / "l_frame.json"


def test_rotation_round_trip():
    w = np.array([0.3, -1.2, 0.7])
    R = rodlimit.exp_so3(w)
    assert np.allclose(R.T @ R, np.eye(3), atol=1e-14)
    assert np.allclose(rodlimit.log_so3(R), w, atol=1e-12)
    assert np.allclose(rodlimit.project_to_rotation(2.5 * R), R, atol=1e-13)
    assert len(rodlimit.rotation_samples(24)) == 24


def test_compute_a_matches_closed_form():
    A = rodlimit.compute_A(1.0, 1.0, mesh_level=3)
    young = 1.0 * (3 + 2) / 2
    assert A.shape == (3, 3)
    assert A[0, 0] == pytest.approx(math.pi / 4, rel=0.01)
    assert A[1, 1] == pytest.approx(math.pi * young / 4, rel=0.01)
    assert abs(A[0, 1]) < 1e-10


def test_svk_density_vanishes_on_rotations():
    R = rodlimit.exp_so3(np.array([0.1, 0.2, 0.3]))
    assert rodlimit.svk_density(R, 1.0, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert rodlimit.svk_density(1.1 * np.eye(3), 1.0, 1.0) > 0.0


def test_validate_config_reports_locations():
    assert rodlimit.validate_config(L_FRAME.read_text()) == []
    errors = rodlimit.validate_config(json.dumps({"structure": {"segments": []}, "extra": 1}))
    assert any("extra" in e for e in errors)


def test_solve_end_couple_closed_form():
    text = json.dumps({
        "structure": {"segments": [{"from": [0, 0, 0], "to": [1, 0, 0]}],
                      "clamped": [{"segment": 0, "end": "start"}]},
        "material": {"lambda": 1, "mu": 1},
        "loads": {"nodes": [{"at": {"segment": 0, "end": "end"},
                             "M": [[0, 0, 0], [0, 0, -1], [0, 1, 0]]}]},
        "solver": {"intervals_per_edge": 8},
    })
    out = rodlimit.solve(text, mesh_level=2)
    a = out["A"][0, 0]
    g = 1.0 / (2.0 * a)
    expected = min(a * t * t - 2 * math.sin(t) for t in np.linspace(g - 0.5, g + 0.5, 20001))
    assert out["report"]["converged"]
    assert out["report"]["energy"] == pytest.approx(expected, rel=1e-6)


def test_scaling_study_reports_slopes():
    study = rodlimit.scaling_study("twist", 2.0, [0.2, 0.1, 0.05])
    assert study["all_pass"]
    with pytest.raises(rodlimit.DomainError):
        rodlimit.scaling_study("twist", 2.0, [0.2, 0.1])


@pytest.mark.skipif(CLI is None, reason="command line tool not configured")
def test_cli_outputs_match_schema(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads(Path(SCHEMA).read_text())
    runs = [
        ["validate", "--config", str(L_FRAME)],
        ["solve", "--config", str(L_FRAME), "--mesh-level", "2"],
        ["solve", "--config", str(L_FRAME), "--kappa", "1.5"],
        ["cross-section", "--config", str(L_FRAME), "--mesh-level", "2"],
        ["scaling-study", "--family", "bend", "--kappa", "1.5", "--deltas", "0.2,0.1,0.05"],
    ]
    for k, args in enumerate(runs):
        out = tmp_path / str(k)
        proc = subprocess.run([CLI, *args, "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        for f in out.glob("*.json"):
            jsonschema.validate(json.loads(f.read_text()), schema)


@pytest.mark.skipif(CLI is None, reason="command line tool not configured")
def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"structure": {"segments": []}, "extra": 1}))
    assert subprocess.run([CLI, "validate", "--config", str(bad)], capture_output=True).returncode == 2
    assert subprocess.run([CLI, "frobnicate"], capture_output=True).returncode == 2
    free = tmp_path / "free.json"
    free.write_text(json.dumps({"structure": {"segments": [{"from": [0, 0, 0], "to": [1, 0, 0]}]},
                                "material": {"lambda": 1, "mu": 1}}))
    proc = subprocess.run([CLI, "solve", "--config", str(free), "--out", str(tmp_path / "o")],
                          capture_output=True)
    assert proc.returncode == 1
