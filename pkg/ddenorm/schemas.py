"""
Artifact schemas - pydantic models for every JSON document the CLI writes

Documents are validated against these models before they are written, and
their JSON schemas are exported next to the artifacts.
"""

import json
from typing import Any, Dict, List, Literal, Optional, Tuple, Type, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ddenorm.errors import InvalidArtifact

Complex = Tuple[float, float]
Number = Union[float, str]


class Metadata(BaseModel):
    command: Optional[str] = None
    versions: Dict[str, str]
    seed: Optional[int] = None
    tolerances: Dict[str, Any] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    timestamp: str


class ErrorDoc(BaseModel):
    kind: str
    message: str
    details: Dict[str, Any] = Field(default_factory=dict)


class PointDoc(BaseModel):
    metadata: Metadata
    model: str
    kind: str
    parameter_names: List[str]
    x: List[float]
    alpha: List[float]
    residual: float
    eigenvalues: List[Complex]
    omega: Optional[float] = None
    omegas: List[float] = Field(default_factory=list)
    L1: Optional[float] = None
    unfolding: List[str] = Field(default_factory=list)


# Normal forms

class _NormalFormDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    metadata: Metadata
    kind: str
    x: List[float]
    alpha: List[float]
    unfolding: List[int]
    K10: List[float]
    K01: List[float]
    cond: Number
    max_residual: Number


class GenHDoc(_NormalFormDoc):
    kind: Literal["genh"]
    omega0: float
    c1: Complex
    c2: Complex
    L1: float
    L2: float
    omega10: float
    omega01: float
    db1_dbeta2: float
    gamma110: Optional[Complex] = None
    gamma101: Optional[Complex] = None
    gamma210: Optional[Complex] = None
    gamma201: Optional[Complex] = None


class ZeHoDoc(_NormalFormDoc):
    kind: Literal["zeho", "thopf"]
    omega0: float
    g200: float
    g011: float
    g300: float
    g111: float
    g110: Complex
    g210: Complex
    g021: Complex
    s: int
    s_product: float
    theta: float
    e: float
    omega1: float
    omega2: float
    transcritical: bool
    deltas: Optional[List[Number]] = None


class HoHoDoc(_NormalFormDoc):
    kind: Literal["hoho"]
    omega1: float
    omega2: float
    g2100: Complex
    g1011: Complex
    g1110: Complex
    g0021: Complex
    theta: float
    delta: float
    b11: float
    b12: float
    b21: float
    b22: float


NORMAL_FORM_DOCS: Dict[str, Type[_NormalFormDoc]] = {
    "genh": GenHDoc,
    "zeho": ZeHoDoc,
    "thopf": ZeHoDoc,
    "hoho": HoHoDoc,
}


# Predictors

class PredictedPointDoc(BaseModel):
    eps: float
    beta: List[float]
    alpha: List[float]
    x: List[float]
    omega: Optional[float] = None
    period: Optional[float] = None
    profile: Optional[List[List[float]]] = None


class PredictorDoc(BaseModel):
    kind: str
    source: str
    eps_sign: str
    claimed_order: Number
    residual_order: Number
    points: List[PredictedPointDoc]


class PredictorsDoc(BaseModel):
    metadata: Metadata
    source: str
    predictors: Dict[str, PredictorDoc]
    excluded: Dict[str, ErrorDoc]
    notes: Dict[str, Any]


# Continuation

class BranchPointDoc(BaseModel):
    arclength: float
    x: List[float]
    alpha: List[float]
    eigenvalues: List[Complex]
    iterations: int
    residual: float
    tests: Dict[str, Number] = Field(default_factory=dict)


class BranchDoc(BaseModel):
    metadata: Metadata
    kind: str
    free: List[str]
    stop_reason: str
    points: List[BranchPointDoc]


class DetectionDoc(BaseModel):
    kind: str
    index: int
    arclength: float
    x: List[float]
    alpha: List[float]
    omegas: List[float]
    L1: Optional[float] = None
    nmfm: Optional[Dict[str, Any]] = None
    error: Optional[ErrorDoc] = None


class DetectedDoc(BaseModel):
    metadata: Metadata
    points: List[DetectionDoc]
    raw_crossings: Dict[str, int]
    counts: Dict[str, int]


# Simulation

class SimulationDoc(BaseModel):
    metadata: Metadata
    model: str
    alpha: List[float]
    t_final: float
    step: float
    stored_points: int
    terminal_amplitude: float
    crossings: Optional[int] = None
    clusters: Optional[int] = None


class ModelsDoc(BaseModel):
    metadata: Metadata
    models: List[Dict[str, Any]]


DOCUMENTS: Dict[str, Type[BaseModel]] = {
    "error": ErrorDoc,
    "point": PointDoc,
    "nmfm_genh": GenHDoc,
    "nmfm_zeho": ZeHoDoc,
    "nmfm_hoho": HoHoDoc,
    "predictors": PredictorsDoc,
    "branch": BranchDoc,
    "detected": DetectedDoc,
    "simulation": SimulationDoc,
    "models": ModelsDoc,
}


def validate(name: str, document: Dict[str, Any]) -> BaseModel:
    """Validate a JSON-ready document against its schema (InvalidArtifact on mismatch)"""
    try:
        return DOCUMENTS[name].model_validate(document)
    except ValidationError as exc:
        raise InvalidArtifact(
            f"{name} document does not match its schema",
            {"document": name, "errors": json.loads(exc.json(include_url=False))},
        ) from exc


def export_schemas(storage) -> List[str]:
    return [storage.save_schema(name, model.model_json_schema()) for name, model in sorted(DOCUMENTS.items())]
