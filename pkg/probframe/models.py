"""Exchange documents read and written by the CLI.

Every document is a pydantic model serialized as JSON with a stable field
order and a ``layout_version`` tag. Complex numbers travel as ``[re, im]``
pairs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal, TypeVar

import numpy as np
from pydantic import BaseModel, Field, model_validator

from probframe.frame import Classification, ProjectorSet
from probframe.qubitframe import PauliParameterTensor, ProbabilityTensor
from probframe.settings import GENERATOR_ID, LAYOUT_VERSION, Tolerances, load_tolerances
from probframe.transfer import PauliTransferMatrix

ComplexPair = tuple[float, float]
Document = TypeVar("Document", bound=BaseModel)


def _pairs(row: np.ndarray) -> list[ComplexPair]:
    return [(float(z.real), float(z.imag)) for z in row]


def _complex(rows: list[list[ComplexPair]]) -> np.ndarray:
    return np.array([[re + 1j * im for re, im in row] for row in rows], dtype=complex)


class SetFile(BaseModel):
    format: Literal["probframe.set"] = "probframe.set"
    layout_version: int = LAYOUT_VERSION
    dim: int = Field(ge=1)
    label: str = ""
    kets: list[list[ComplexPair]]

    @model_validator(mode="after")
    def _check_lengths(self) -> "SetFile":
        bad = [i for i, ket in enumerate(self.kets) if len(ket) != self.dim]
        if bad:
            raise ValueError(f"kets {bad} do not have {self.dim} amplitudes")
        return self

    @classmethod
    def from_projector_set(cls, pset: ProjectorSet) -> "SetFile":
        return cls(dim=pset.dim, label=pset.label, kets=[_pairs(ket) for ket in pset.kets])

    def to_projector_set(self, tol: Tolerances | None = None) -> ProjectorSet:
        return ProjectorSet.from_kets(_complex(self.kets), label=self.label, tol=tol)


class StateFile(BaseModel):
    """A density matrix (``entries``) or a flat tensor (``values``)."""

    format: Literal["probframe.state"] = "probframe.state"
    layout_version: int = LAYOUT_VERSION
    kind: Literal["density", "pauli", "probability"]
    m: int = Field(ge=1)
    values: list[float] | None = None
    entries: list[list[ComplexPair]] | None = None

    @model_validator(mode="after")
    def _check_payload(self) -> "StateFile":
        if self.kind == "density":
            if self.entries is None or len(self.entries) != 2**self.m:
                raise ValueError(f"density document needs a {2**self.m}x{2**self.m} entries matrix")
        else:
            size = (4 if self.kind == "pauli" else 6) ** self.m
            if self.values is None or len(self.values) != size:
                raise ValueError(f"{self.kind} document needs {size} values")
        return self

    @classmethod
    def from_density(cls, rho: np.ndarray) -> "StateFile":
        rho = np.asarray(rho, dtype=complex)
        return cls(kind="density", m=rho.shape[0].bit_length() - 1, entries=[_pairs(row) for row in rho])

    @classmethod
    def from_pauli(cls, t: PauliParameterTensor) -> "StateFile":
        return cls(kind="pauli", m=t.m, values=t.values.tolist())

    @classmethod
    def from_probability(cls, p: ProbabilityTensor) -> "StateFile":
        return cls(kind="probability", m=p.m, values=p.values.tolist())

    def to_density(self) -> np.ndarray:
        return _complex(self.entries)

    def to_pauli(self) -> PauliParameterTensor:
        return PauliParameterTensor(m=self.m, values=self.values)

    def to_probability(self) -> ProbabilityTensor:
        return ProbabilityTensor(m=self.m, values=self.values)


class PTMFile(BaseModel):
    format: Literal["probframe.ptm"] = "probframe.ptm"
    layout_version: int = LAYOUT_VERSION
    arity: int = Field(ge=1)
    trace_preserving: bool = True
    entries: list[list[float]]

    @classmethod
    def from_ptm(cls, a: PauliTransferMatrix) -> "PTMFile":
        return cls(arity=a.arity, trace_preserving=a.trace_preserving, entries=a.entries.tolist())

    def to_ptm(self) -> PauliTransferMatrix:
        entries = np.array(self.entries, dtype=float)
        if entries.shape != (4**self.arity, 4**self.arity):
            raise ValueError(f"PTM of arity {self.arity} needs {4**self.arity}x{4**self.arity} entries")
        return PauliTransferMatrix(arity=self.arity, entries=entries, trace_preserving=self.trace_preserving)


class Report(BaseModel):
    """Fields every CLI output carries."""

    layout_version: int = LAYOUT_VERSION
    generator: str = GENERATOR_ID
    seed: int | None = None
    tolerances: Tolerances = Field(default_factory=load_tolerances)


class QubitMarginal(BaseModel):
    qubit: int
    parameters: list[float]
    probabilities: dict[str, list[float]]


class SimulationReport(Report):
    command: Literal["simulate"] = "simulate"
    qubits: int
    steps: int
    representation: Literal["ptm", "density", "both"]
    pauli: list[float]
    probabilities: list[float] | None = None
    marginals: list[QubitMarginal]
    discrepancy: float | None = None


class ClassificationReport(Report):
    command: Literal["verify-set"] = "verify-set"
    label: str
    classification: Classification


class ConversionReport(Report):
    command: Literal["convert"] = "convert"
    source_kind: str
    target_kind: str
    policy: str | None = None
    document: StateFile


class BenchEntry(BaseModel):
    qubits: int
    gates: int
    local_seconds_per_gate: float
    dense_seconds_per_gate: float
    speedup: float
    discrepancy: float


class BenchReport(Report):
    command: Literal["bench"] = "bench"
    depth: int
    results: list[BenchEntry]
    environment: dict[str, str]


class ErrorReport(Report):
    error: str
    message: str
    details: dict[str, Any] = Field(default_factory=dict)


def read_document(path: str | Path, model: type[Document]) -> Document:
    return model.model_validate_json(Path(path).read_text())


def write_document(document: BaseModel, path: str | Path | None = None) -> str:
    text = document.model_dump_json(indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
