"""Pydantic request/response models for the HTTP service and CLI reports.

The response models double as the published JSON report schema
(``schema: 1``); ``docs/report.schema.json`` in the repository is
generated from them and report instances are validated against it in
the test suite.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = 1

Mode = Literal["exact", "approx", "dense", "kraus-sum", "trajectories"]


class SimulateRequest(BaseModel):
    circuit: str = Field(description="circuit file text")
    psi: str = "zeros"
    v: str = "ideal"
    mode: Mode = "exact"
    level: int = 1
    samples: Optional[int] = None
    delta: Optional[float] = None
    seed: int = 0
    workers: Optional[int] = None
    mem_budget: Optional[int] = None


class EqcheckRequest(BaseModel):
    ideal: str = Field(description="ideal circuit file text")
    circuit: str = Field(description="noisy circuit file text")
    mode: Literal["exact", "approx", "dense"] = "exact"
    level: int = 1
    threshold: Optional[float] = None
    seed: int = 0
    workers: Optional[int] = None
    mem_budget: Optional[int] = None


class DecomposeRequest(BaseModel):
    channel: str = Field(description="channel spec, e.g. depolarizing(0.01)")


class GenRequest(BaseModel):
    family: Literal["bv", "qft", "qaoa", "inst"]
    n: Optional[int] = None
    secret: Optional[str] = None
    edges: Optional[str] = None
    layers: int = 1
    gammas: Optional[list[float]] = None
    betas: Optional[list[float]] = None
    rows: Optional[int] = None
    cols: Optional[int] = None
    depth: Optional[int] = None
    seed: int = 0
    policy: Optional[str] = None
    graph: Optional[str] = Field(default=None, description="coupling graph file text")


class BenchRequest(BaseModel):
    circuit: str
    ideal: Optional[str] = None
    task: Literal["simulate", "eqcheck", "both"] = "simulate"
    levels: list[int] = Field(default_factory=lambda: [0, 1])
    psi: str = "zeros"
    v: str = "ideal"
    seed: int = 0
    workers: Optional[int] = None
    mem_budget: Optional[int] = None


class CircuitStatsModel(BaseModel):
    n_qubits: int
    gate_count: int
    single_qubit_noise_count: int
    two_qubit_noise_count: int
    max_noise_rate: float


class SimulateReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    command: Literal["simulate"] = "simulate"
    mode: Mode
    value: float
    clamped: float
    psi: str
    v: str
    seed: int
    workers: int
    elapsed_seconds: float
    circuit_stats: CircuitStatsModel
    level: Optional[int] = None
    term_sums: Optional[list[float]] = None
    bound: Optional[float] = None
    contraction_count: Optional[int] = None
    samples: Optional[int] = None
    std_error: Optional[float] = None
    delta: Optional[float] = None
    warnings: list[str] = Field(default_factory=list)


class EqcheckReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    command: Literal["eqcheck"] = "eqcheck"
    mode: Literal["exact", "approx", "dense"]
    fidelity: float
    clamped: float
    seed: int
    workers: int
    elapsed_seconds: float
    circuit_stats: CircuitStatsModel
    level: Optional[int] = None
    term_sums: Optional[list[float]] = None
    bound: Optional[float] = None
    contraction_count: Optional[int] = None
    threshold: Optional[float] = None
    equivalent_within: Optional[bool] = None
    warnings: list[str] = Field(default_factory=list)


class FactorTermModel(BaseModel):
    singular_value: float
    left: list[list[list[float]]] = Field(description="U_j as [re, im] entries")
    right: list[list[list[float]]] = Field(description="V_j as [re, im] entries")


class DecomposeReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    command: Literal["decompose"] = "decompose"
    channel: str
    arity: int
    noise_rate: float
    matrix_rep: list[list[list[float]]]
    reshuffled: list[list[list[float]]]
    singular_values: list[float]
    terms: list[FactorTermModel]
    reconstruction_error: float
    phase_convention: str


class BenchRow(BaseModel):
    task: Literal["simulate", "eqcheck"]
    level: int
    value: float
    bound: float
    contraction_count: int
    elapsed_seconds: float


class BenchReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    command: Literal["bench"] = "bench"
    seed: int
    workers: int
    circuit_stats: CircuitStatsModel
    rows: list[BenchRow]
    warnings: list[str] = Field(default_factory=list)


class GenResponse(BaseModel):
    circuit: str
    name: str
    seed: int
    policy: Optional[str] = None
    stats: CircuitStatsModel


class ErrorInfo(BaseModel):
    kind: Literal["parse", "validation", "resource", "internal"]
    message: str
    line: Optional[int] = None
    col: Optional[int] = None


class ErrorResponse(BaseModel):
    error: ErrorInfo


def report_json_schema() -> dict:
    """The published schema: one of the four report shapes."""
    defs: dict = {}
    variants = []
    for model in (SimulateReport, EqcheckReport, DecomposeReport, BenchReport):
        s = model.model_json_schema(
            ref_template="#/$defs/{model}", mode="serialization"
        )
        defs.update(s.pop("$defs", {}))
        defs[model.__name__] = s
        variants.append({"$ref": f"#/$defs/{model.__name__}"})
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "qnoise report",
        "oneOf": variants,
        "$defs": defs,
    }
