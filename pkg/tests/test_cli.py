import json

import numpy as np
import pytest

from probframe.cli import bench_one, format_circuit, main, parse_circuit
from probframe.errors import ParseError, RangeError
from probframe.models import PTMFile, SetFile, StateFile, read_document, write_document
from probframe.oracle import random_circuit
from probframe.qubitframe import six_state_set
from probframe.transfer import ground_tensor


def _run(tmp_path, *argv):
    out = tmp_path / "report.json"
    status = main(["--out", str(out), *argv])
    return status, json.loads(out.read_text()) if out.exists() else None


def test_parse_circuit():
    circuit = parse_circuit("qubits 2\n# comment\nh 0\ncnot 0 1  # trailing\nrz 1 0.25\n")
    assert circuit.qubits == 2
    assert [(s.name, s.targets, s.params) for s in circuit.steps] == [
        ("h", [0], []),
        ("cnot", [0, 1], []),
        ("rz", [1], [0.25]),
    ]


@pytest.mark.parametrize(
    "text, error, line, column",
    [
        ("qubits 1\ndepol 0 1.5", RangeError, 2, 9),
        ("qubits 2\ncnot 1 1", RangeError, 2, 8),
        ("qubits 2\nh 2", RangeError, 2, 3),
        ("qubits 2\nfoo 0", ParseError, 2, 1),
        ("qubits 2\nh x", ParseError, 2, 3),
        ("h 0", ParseError, 1, 1),
        ("qubits 1\nqubits 1", ParseError, 2, 1),
        ("qubits 1\nrx 0 nan", RangeError, 2, 6),
        ("", ParseError, 1, 1),
    ],
)
def test_parse_errors(text, error, line, column):
    with pytest.raises(error) as info:
        parse_circuit(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_format_round_trip(rng):
    circuit = random_circuit(3, 25, rng)
    assert parse_circuit(format_circuit(circuit)) == circuit


def test_simulate_bell_both(tmp_path, samples):
    status, report = _run(tmp_path, "simulate", str(samples / "bell.qc"), "--repr", "both")
    assert status == 0
    assert report["command"] == "simulate"
    assert report["discrepancy"] < 1e-9
    pauli = np.array(report["pauli"]).reshape(4, 4)
    assert pauli[1, 1] == pytest.approx(1.0)
    assert pauli[2, 2] == pytest.approx(-1.0)
    assert pauli[3, 3] == pytest.approx(1.0)
    assert len(report["probabilities"]) == 36


def test_simulate_empty_circuit(tmp_path):
    circuit = tmp_path / "empty.qc"
    circuit.write_text("qubits 1\n")
    status, report = _run(tmp_path, "simulate", str(circuit))
    assert status == 0
    np.testing.assert_allclose(report["pauli"], [1, 0, 0, 1], atol=1e-12)
    assert report["marginals"][0]["probabilities"]["z"] == pytest.approx([1.0, 0.0])


def test_simulate_ghz_marginals(tmp_path, samples):
    status, report = _run(tmp_path, "simulate", str(samples / "ghz3.qc"), "--repr", "density")
    assert status == 0
    for row in report["marginals"]:
        for axis in ("x", "y", "z"):
            assert row["probabilities"][axis] == pytest.approx([0.5, 0.5], abs=1e-12)


def test_simulate_noisy_agrees(tmp_path, samples):
    status, report = _run(tmp_path, "--seed", "5", "simulate", str(samples / "noisy.qc"), "--repr", "both")
    assert status == 0
    assert report["seed"] == 5
    assert report["discrepancy"] < 1e-9


def test_simulate_from_initial_state(tmp_path):
    state = tmp_path / "plus.json"
    write_document(StateFile(kind="pauli", m=1, values=[1.0, 1.0, 0.0, 0.0]), state)
    circuit = tmp_path / "h.qc"
    circuit.write_text("qubits 1\nh 0\n")
    status, report = _run(tmp_path, "simulate", str(circuit), "--initial", str(state), "--repr", "both")
    assert status == 0
    np.testing.assert_allclose(report["pauli"], [1, 0, 0, 1], atol=1e-12)


def test_verify_six_state(tmp_path, samples):
    status, report = _run(tmp_path, "verify-set", str(samples / "six_state.json"))
    assert status == 0
    classification = report["classification"]
    assert classification["perfect"] is True
    assert classification["representative"] is True
    assert report["tolerances"]["orthogonality"] == pytest.approx(1e-9)


def test_verify_two_bases(tmp_path, samples):
    status, report = _run(tmp_path, "verify-set", str(samples / "two_bases.json"))
    assert status == 0
    classification = report["classification"]
    assert classification["rank"] == 3
    assert classification["representative"] is False


def test_verify_two_qubit_six_state(tmp_path):
    set_path = tmp_path / "six2.json"
    write_document(SetFile.from_projector_set(six_state_set(2)), set_path)
    status, report = _run(tmp_path, "verify-set", str(set_path))
    assert status == 0
    classification = report["classification"]
    assert classification["almost_perfect"] is True
    assert classification["perfect"] is False
    witness = classification["witness"]
    assert sorted([witness["ket"], *witness["first"]]) != sorted([witness["ket"], *witness["second"]])


def test_verify_partial_on_small_budget(tmp_path):
    set_path = tmp_path / "six2.json"
    write_document(SetFile.from_projector_set(six_state_set(2)), set_path)
    status, report = _run(tmp_path, "verify-set", str(set_path), "--search-limit", "10")
    assert status == 1
    assert report["classification"]["representative"] is True
    assert report["classification"]["complete"] is None


def test_convert_density_round_trip(tmp_path, bell_rho):
    source = tmp_path / "bell.json"
    write_document(StateFile.from_density(bell_rho), source)
    status, report = _run(tmp_path, "convert", str(source), "--to", "probability")
    assert status == 0
    probabilities = tmp_path / "report.json"

    back = tmp_path / "back.json"
    assert main(["--out", str(back), "convert", str(probabilities), "--to", "density"]) == 0
    document = StateFile.model_validate(json.loads(back.read_text())["document"])
    np.testing.assert_allclose(document.to_density(), bell_rho, atol=1e-12)


def test_convert_pauli_to_probability(tmp_path):
    source = tmp_path / "mixed.json"
    write_document(StateFile(kind="pauli", m=1, values=[1.0, 0.0, 0.0, 0.0]), source)
    status, report = _run(tmp_path, "convert", str(source), "--to", "probability")
    assert status == 0
    assert report["document"]["values"] == pytest.approx([0.5] * 6)
    assert report["policy"] is None


def test_convert_inconsistent_probabilities(tmp_path, capsys):
    source = tmp_path / "bad.json"
    write_document(StateFile(kind="probability", m=1, values=[0.5, 0.5, 0.5, 0.5, 0.7, 0.1]), source)
    status, report = _run(tmp_path, "convert", str(source), "--to", "pauli")
    assert status == 2
    assert report is None
    error = json.loads(capsys.readouterr().err)
    assert error["error"] == "InconsistentProbabilities"
    assert error["details"]["axes"] == [3]
    assert error["layout_version"] == 1


def test_convert_rejects_unphysical_pauli(tmp_path, capsys):
    source = tmp_path / "big.json"
    write_document(StateFile(kind="pauli", m=1, values=[1.0, 2.0, 0.0, 0.0]), source)
    assert main(["convert", str(source), "--to", "probability"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "UnphysicalTensor"


def test_parse_error_report(tmp_path, capsys):
    circuit = tmp_path / "bad.qc"
    circuit.write_text("qubits 2\ncnot 1 1\n")
    assert main(["simulate", str(circuit)]) == 2
    error = json.loads(capsys.readouterr().err)
    assert error["error"] == "RangeError"
    assert (error["details"]["line"], error["details"]["column"]) == (2, 8)


def test_tolerance_override(tmp_path, samples):
    status, report = _run(tmp_path, "--tolerance", "psd=1e-6", "verify-set", str(samples / "six_state.json"))
    assert status == 0
    assert report["tolerances"]["psd"] == pytest.approx(1e-6)


def test_bad_tolerance_name(capsys, samples):
    assert main(["--tolerance", "nope=1", "verify-set", str(samples / "six_state.json")]) == 2
    assert "--tolerance" in json.loads(capsys.readouterr().err)["message"]


def test_bench(tmp_path):
    status, report = _run(tmp_path, "--seed", "1", "bench", "--qubits", "1-2", "--depth", "4")
    assert status == 0
    assert [entry["qubits"] for entry in report["results"]] == [1, 2]
    assert all(entry["discrepancy"] < 1e-9 for entry in report["results"])
    assert "numpy" in report["environment"]


def test_bench_guard(capsys):
    assert main(["bench", "--qubits", "7"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "GuardExceeded"


def test_bench_one_counts_gates(rng):
    entry = bench_one(3, 6, rng)
    assert entry.gates == 6
    assert entry.discrepancy < 1e-9


def test_bench_local_beats_dense_at_five_qubits():
    entries = [bench_one(5, 20, np.random.default_rng(seed)) for seed in range(3)]
    assert all(entry.discrepancy < 1e-9 for entry in entries)
    assert max(entry.speedup for entry in entries) > 5


def test_bench_records_drawn_seed(tmp_path):
    status, report = _run(tmp_path, "bench", "--qubits", "1", "--depth", "2")
    assert status == 0
    assert isinstance(report["seed"], int)
    assert 0 <= report["seed"] < 2**63


def test_simulate_writes_circuit_ptm(tmp_path, samples):
    ptm_path = tmp_path / "bell_ptm.json"
    status, report = _run(tmp_path, "simulate", str(samples / "bell.qc"), "--ptm-out", str(ptm_path))
    assert status == 0
    ptm = read_document(ptm_path, PTMFile).to_ptm()
    assert ptm.arity == 2
    np.testing.assert_allclose(ptm.entries @ ground_tensor(2).values, report["pauli"], atol=1e-12)


def test_ptm_out_guard(tmp_path, capsys):
    circuit = tmp_path / "wide.qc"
    circuit.write_text("qubits 7\n")
    assert main(["simulate", str(circuit), "--ptm-out", str(tmp_path / "wide.json")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "GuardExceeded"
