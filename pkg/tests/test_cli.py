from contextlib import redirect_stdout
import io
import json
from pathlib import Path

import pytest

from qstar.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(argv):
    """main() with the printed table discarded."""
    with redirect_stdout(io.StringIO()):
        return main(argv)


def _write(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def _report(out, name):
    return json.loads((Path(out) / f"{name}.json").read_text())


def test_gns_trace_run(tmp_path, capsys):
    assert main(["run", str(CONFIGS / "gns_m2_trace.json"), "--out", str(tmp_path)]) == 0
    report = _report(tmp_path, "gns_m2_trace")
    assert report["status"] == "pass"
    assert report["metrics"]["hilbert_dim"] == 4
    assert report["metrics"]["reconstruction"] < 1e-9
    assert "status  pass" in capsys.readouterr().out


def test_lattice_demo_run_writes_csv(tmp_path):
    assert run(["run", str(CONFIGS / "lattice_demo.json"), "--out", str(tmp_path)]) == 0
    report = _report(tmp_path, "lattice_demo")
    assert report["details"]["two_lm"]["region"] == [0, 1]
    assert report["artifacts"] == ["lattice_demo.json", "lattice_demo.csv"]
    lines = (tmp_path / "lattice_demo.csv").read_text().splitlines()
    assert lines[0] == "region,estimate,pass"
    assert len(lines) > 1


@pytest.mark.parametrize("name", ["modify_m2", "spatial_m2", "commutant_pauli3", "decompose_m2"])
def test_shipped_configs_pass(tmp_path, name):
    assert run(["run", str(CONFIGS / f"{name}.json"), "--out", str(tmp_path)]) == 0
    assert _report(tmp_path, name)["status"] == "pass"


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(["run", str(path)]) == 1
    assert "malformed JSON" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert run(["run", str(tmp_path / "absent.json")]) == 1


def test_schema_error_names_field(tmp_path, capsys):
    config = {"kind": "sweep", "seed": 0, "payload": {"suite": "gns", "trials": -1}}
    assert run(["run", _write(tmp_path, config)]) == 1
    assert "/payload/trials" in capsys.readouterr().err


def test_unknown_kind(tmp_path):
    assert run(["run", _write(tmp_path, {"kind": "plot", "seed": 0, "payload": {}})]) == 1


def test_sweep_command_needs_sweep_kind(tmp_path):
    assert run(["sweep", str(CONFIGS / "gns_m2_trace.json"), "--out", str(tmp_path)]) == 1


def test_bad_arguments():
    assert run(["run"]) == 1
    assert run(["run", str(CONFIGS / "gns_m2_trace.json"), "--jobs", "0"]) == 1


def test_non_representable_functional_fails(tmp_path):
    config = {"kind": "gns", "seed": 0, "output": "neg", "payload": {"algebra": "M2", "state": {"values": [-1, 0, 0, 0]}}}
    assert run(["run", _write(tmp_path, config), "--out", str(tmp_path)]) == 2
    report = _report(tmp_path, "neg")
    assert report["status"] == "fail"
    assert report["details"]["error"] == "RepresentabilityError"


def test_incomplete_decomposition_is_partial(tmp_path):
    config = {"kind": "decompose", "seed": 0, "output": "dec",
              "payload": {"algebra": "M2", "state": {"density": [[0.5, 0], [0, 0.5]]},
                          "generators": [[[1.4142135623730951, 0], [0, 0]]]}}
    assert run(["run", _write(tmp_path, config), "--out", str(tmp_path)]) == 3


def test_empty_sweep_is_partial(tmp_path):
    config = {"kind": "sweep", "seed": 0, "output": "empty", "payload": {"suite": "gns", "trials": 0}}
    assert run(["sweep", _write(tmp_path, config), "--out", str(tmp_path)]) == 3
    assert _report(tmp_path, "empty")["metrics"] == {}


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("QSTAR_OUT", str(tmp_path / "env"))
    assert run(["run", str(CONFIGS / "gns_m2_trace.json")]) == 0
    assert (tmp_path / "env" / "gns_m2_trace.json").exists()
    # --out wins over the environment
    assert run(["run", str(CONFIGS / "gns_m2_trace.json"), "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "gns_m2_trace.json").exists()


def test_seed_override_recorded(tmp_path):
    assert run(["run", str(CONFIGS / "gns_m2_trace.json"), "--out", str(tmp_path), "--seed", "17"]) == 0
    assert _report(tmp_path, "gns_m2_trace")["seed"] == 17


def test_sweep_reports_byte_identical_across_jobs(tmp_path):
    config = {"kind": "sweep", "seed": 5, "output": "s", "payload": {"suite": "gns", "trials": 6}}
    path = _write(tmp_path, config)
    assert run(["sweep", path, "--out", str(tmp_path / "a"), "--jobs", "1"]) == 0
    assert run(["sweep", path, "--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    assert (tmp_path / "a" / "s.json").read_bytes() == (tmp_path / "b" / "s.json").read_bytes()
