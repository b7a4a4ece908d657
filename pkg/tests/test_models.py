import numpy as np
import pytest
from pydantic import ValidationError

from probframe.models import ClassificationReport, PTMFile, SetFile, SimulationReport, StateFile, read_document, write_document
from probframe.frame import classify
from probframe.qubitframe import six_state_set, tilde_from_rho
from probframe.settings import LAYOUT_VERSION
from probframe.transfer import ptm_of_channel
from probframe.gates import amplitude_damping


def test_set_file_round_trip(tmp_path):
    pset = six_state_set(1)
    path = tmp_path / "six.json"
    write_document(SetFile.from_projector_set(pset), path)
    loaded = read_document(path, SetFile).to_projector_set()
    assert loaded.label == "six-state-1"
    np.testing.assert_allclose(loaded.kets, pset.kets, atol=1e-15)


def test_set_file_rejects_short_kets():
    with pytest.raises(ValidationError):
        SetFile(dim=2, kets=[[(1.0, 0.0)]])


def test_state_file_payload_checks():
    with pytest.raises(ValidationError):
        StateFile(kind="pauli", m=1, values=[1, 0, 0])
    with pytest.raises(ValidationError):
        StateFile(kind="density", m=1, values=[1, 0, 0, 0])


def test_state_file_density(bell_rho):
    document = StateFile.from_density(bell_rho)
    assert document.m == 2
    np.testing.assert_allclose(document.to_density(), bell_rho)
    pauli = StateFile.from_pauli(tilde_from_rho(bell_rho))
    assert pauli.to_pauli()[2, 2] == pytest.approx(-1.0)


def test_ptm_file(tmp_path):
    a = ptm_of_channel(amplitude_damping(0.2))
    path = tmp_path / "ptm.json"
    write_document(PTMFile.from_ptm(a), path)
    loaded = read_document(path, PTMFile).to_ptm()
    assert loaded.arity == 1
    np.testing.assert_array_equal(loaded.entries, a.entries)
    with pytest.raises(ValueError):
        PTMFile(arity=2, entries=[[1.0]]).to_ptm()


def test_reports_carry_layout_and_tolerances():
    report = SimulationReport(qubits=1, steps=0, representation="ptm", pauli=[1, 0, 0, 1], marginals=[], seed=3)
    dumped = report.model_dump()
    assert dumped["layout_version"] == LAYOUT_VERSION
    assert dumped["generator"] == "numpy.random.PCG64"
    assert dumped["tolerances"]["psd"] == pytest.approx(1e-9)
    assert list(dumped)[:4] == ["layout_version", "generator", "seed", "tolerances"]


def test_classification_report_round_trip():
    report = ClassificationReport(label="six", classification=classify(six_state_set(1)))
    again = ClassificationReport.model_validate_json(report.model_dump_json())
    assert again.classification.perfect
