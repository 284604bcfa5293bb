import io
import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from spacetime_ft.circuit import circuit_to_json, parse_circuit, serialize_circuit
from spacetime_ft.cli import main
from spacetime_ft.fixtures import toy_circuit
from spacetime_ft.report import REPORT_SCHEMA

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def run_json(capsys, *argv, **kw):
    rc, out, err = run(capsys, *argv, "--format", "json", **kw)
    data = json.loads(out) if out else None
    if data is not None:
        jsonschema.validate(data, REPORT_SCHEMA)
    return rc, data, err


@pytest.mark.parametrize(
    "argv",
    [
        ("emit-code", "toy"),
        ("emit-code", "flag-b"),
        ("distance", "flag-a", "--max-weight", "2"),
        ("distance", str(SAMPLES / "masked_422.code")),
        ("distance", str(SAMPLES / "bacon_shor_2x2.code"), "--kind", "full"),
        ("distance", str(SAMPLES / "bacon_shor_2x2.code"), "--method", "random", "--seed", "3"),
        ("verify", "flag-b"),
        ("verify", "flag-a", "--d-u-weight", "2"),
        ("decode", "flag-b", "--syndrome", "00"),
        ("sample", "toy", "-p", "0.01", "--shots", "2000", "--seed", "1"),
        ("exhaust", "toy", "-p", "0.01", "--order", "1"),
        ("bound", "--T", "100", "-p", "0.01", "-a", "15", "--d", "3"),
        ("gen", "toy"),
        ("gen", "surface", "--L", "2"),
        ("emit-code", str(SAMPLES / "ec_four_qubit.circuit")),
    ],
)
def test_commands_validate_and_are_deterministic(capsys, argv):
    rc, data, _ = run_json(capsys, *argv)
    assert rc == 0
    assert data["command"] == argv[0]
    rc2, out2, _ = run(capsys, *argv, "--format", "json")
    rc1, out1, _ = run(capsys, *argv, "--format", "json")
    assert out1 == out2 and rc1 == rc2 == 0
    rc, text, _ = run(capsys, *argv)
    assert rc == 0 and text.strip()


def test_exit_one_on_confusion(capsys):
    rc, data, _ = run_json(capsys, "verify", "toy")
    assert rc == 1
    assert data["verdicts"]["confusion_count"] > 0


def test_exit_one_on_unexplained_syndrome(capsys, tmp_path):
    f = tmp_path / "two.circuit"
    f.write_text("qubits 2\nprep_z 1\nprep_z 0\nmeas_z 0\nmeas_z 1\n")
    rc, data, _ = run_json(capsys, "decode", str(f), "--syndrome", "11", "--cap", "1")
    assert rc == 1 and data["decode"]["found"] is False
    rc, data, _ = run_json(capsys, "decode", str(f), "--syndrome", "11", "--cap", "2")
    assert rc == 0 and len(data["decode"]["faults"]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ("verify", "/nonexistent/file.circuit"),
        ("decode", "flag-b", "--syndrome", "0"),
        ("decode", "flag-b", "--syndrome", "0x"),
        ("sample", "toy", "-p", "2", "--seed", "1", "--shots", "10"),
        ("sample", "toy", "-p", "0.1", "--seed", "1", "--shots", "0"),
        ("bound", "--T", "10", "-p", "-0.5", "-a", "3"),
        ("verify", "flag-a", "--max-faults", "-1"),
    ],
)
def test_exit_two_on_bad_input(capsys, argv):
    rc, out, err = run(capsys, *argv)
    assert rc == 2 and err.startswith("error:") and not out


def test_exit_two_on_parse_error_with_line(capsys, tmp_path):
    f = tmp_path / "bad.circuit"
    f.write_text("qubits 2\ncnot 0 0\n")
    rc, _, err = run(capsys, "emit-code", str(f))
    assert rc == 2 and "2" in err


def test_code_file_rejected_where_circuit_needed(capsys):
    rc, _, err = run(capsys, "verify", str(SAMPLES / "masked_422.code"))
    assert rc == 2 and "circuit" in err


def test_usage_errors_from_argparse():
    with pytest.raises(SystemExit) as e:
        main(["sample", "toy", "-p", "0.1"])
    assert e.value.code == 2


def test_stdin_and_json_circuit_inputs(capsys, monkeypatch, tmp_path):
    text = serialize_circuit(toy_circuit())
    _, a, _ = run_json(capsys, "emit-code", "-", stdin=text, monkeypatch=monkeypatch)
    _, b, _ = run_json(capsys, "emit-code", "toy")
    assert a["code"] == b["code"] and a["circuit"]["sha256"] == b["circuit"]["sha256"]
    f = tmp_path / "toy.json"
    f.write_text(json.dumps(circuit_to_json(toy_circuit())))
    _, c, _ = run_json(capsys, "emit-code", str(f))
    assert c["code"] == b["code"]


def test_gen_round_trips(capsys):
    rc, text, _ = run(capsys, "gen", "flag-b", "--stab", "XXXX", "--stab", "ZZZZ")
    assert rc == 0
    c = parse_circuit(text)
    assert [s.letters() for s in c.input_stabilizer] == ["XXXX", "ZZZZ"]


def test_sample_worker_count_does_not_change_output(capsys, monkeypatch):
    argv = ("sample", "flag-b", "-p", "0.01", "--shots", "20000", "--seed", "9", "--format", "json")
    _, one, _ = run(capsys, *argv, "--workers", "1")
    _, four, _ = run(capsys, *argv, "--workers", "4")
    assert one == four
    monkeypatch.setenv("SPACETIME_FT_WORKERS", "3")
    _, env, _ = run(capsys, *argv)
    assert env == one


def test_distance_reports_bacon_shor(capsys):
    _, data, _ = run_json(capsys, "distance", str(SAMPLES / "bacon_shor_2x2.code"))
    s = data["code_summary"]
    assert (s["N"], s["k"], s["gauge_rank"], s["d"]) == (4, 1, 4, 2)


def test_console_script_installed():
    out = subprocess.run(
        [sys.executable, "-m", "spacetime_ft.cli", "bound", "--T", "1000", "-p", "0.01", "-a", "15", "--format", "json"],
        capture_output=True, text=True, check=True,
    ).stdout
    assert json.loads(out)["bounds"]["entropy_bits"] == pytest.approx(119.862, abs=1e-3)
