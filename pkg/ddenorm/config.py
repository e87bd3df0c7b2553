"""
Run Configuration - validated JSON run documents and process-wide settings
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ddenorm.errors import ConfigError
from ddenorm.model import DelayModel
from ddenorm.spectrum import DEFAULT_BORDER_SEED

CODIM2_KINDS = ("genh", "zeho", "thopf", "hoho")
CODIM2_COMMANDS = ("analyze", "predict")


class Settings(BaseSettings):
    """Numerical defaults, overridable through DDENORM_* variables or .env"""

    newton_tol: float = 1e-10
    default_seed: int = DEFAULT_BORDER_SEED
    collocation_points: Optional[int] = None
    log_level: str = "WARNING"

    model_config = SettingsConfigDict(env_prefix="DDENORM_", env_file=".env", extra="ignore")


# Command blocks

class PointBlock(BaseModel):
    """Initial guess for the point to analyze or continue from"""

    kind: Literal["equilibrium", "fold", "hopf", "genh", "zeho", "thopf", "hoho"] = "hopf"
    example: Optional[str] = Field(None, description="Name of a built-in example point of the model")
    state: Optional[List[float]] = Field(None, description="Equilibrium guess")
    omega: Optional[float] = Field(None, gt=0, description="Target Hopf frequency")
    omegas: Optional[List[float]] = Field(None, description="Target frequencies of a Hopf-Hopf point")
    free: Optional[str] = Field(None, description="Free parameter when correcting a Hopf or fold point")
    correct: bool = True


class AnalysisBlock(BaseModel):
    collocation_points: Optional[int] = Field(None, ge=4, le=400)
    rightmost: int = Field(6, ge=1, le=40)
    l1_tol: float = Field(1e-6, gt=0)


class PredictBlock(BaseModel):
    eps_min: float = Field(1e-4, gt=0)
    eps_max: float = Field(1e-1, gt=0)
    eps_count: int = Field(61, ge=2, le=10000)
    profiles: bool = True

    def eps_grid(self) -> np.ndarray:
        if self.eps_max <= self.eps_min:
            raise ConfigError("eps_max must exceed eps_min", {"eps_min": self.eps_min, "eps_max": self.eps_max})
        return np.logspace(np.log10(self.eps_min), np.log10(self.eps_max), self.eps_count)


class ContinuationBlock(BaseModel):
    problem: Literal["equilibrium", "fold", "transcritical", "hopf"] = "hopf"
    free: List[str] = Field(default_factory=list)
    seed_offset: Dict[str, float] = Field(default_factory=dict,
                                          description="Parameter shifts giving the second seed point")
    steps: int = Field(100, ge=1, le=100000)
    initial_step: float = Field(1e-2, gt=0)
    min_step: float = Field(1e-6, gt=0)
    max_step: float = Field(5e-2, gt=0)
    weights: Optional[List[float]] = None
    box: Dict[str, Tuple[float, float]] = Field(default_factory=dict)
    both_directions: bool = True
    detect: List[Literal["genh", "zeho", "hoho"]] = Field(default_factory=lambda: ["genh", "zeho", "hoho"])
    merge_tol: float = Field(1e-4, gt=0)
    param_tol: float = Field(1e-8, gt=0)


class SectionBlock(BaseModel):
    component: int = Field(0, ge=0)
    level: float = 0.0
    direction: Literal[-1, 0, 1] = 1
    cluster_radius: float = Field(1e-2, gt=0)


class SimulationBlock(BaseModel):
    t_final: float = Field(100.0, ge=0)
    dt_max: float = Field(1e-2, gt=0)
    history: Optional[List[float]] = Field(None, description="Constant history; defaults to the point state")
    offset: Optional[List[float]] = Field(None, description="Added to the constant history")
    keep_last: Optional[float] = Field(None, gt=0)
    sample_rate: Optional[float] = Field(None, gt=0)
    section: Optional[SectionBlock] = None


class RunConfig(BaseModel):
    """One run: model, parameters and the blocks of the commands it feeds"""

    model: str
    parameters: Optional[List[float]] = None
    set_parameters: Dict[str, float] = Field(default_factory=dict,
                                             description="Named values applied on top of the parameter vector")
    unfolding: List[str] = Field(default_factory=list)
    point: PointBlock = Field(default_factory=PointBlock)
    analysis: AnalysisBlock = Field(default_factory=AnalysisBlock)
    predict: PredictBlock = Field(default_factory=PredictBlock)
    continuation: ContinuationBlock = Field(default_factory=ContinuationBlock)
    simulation: SimulationBlock = Field(default_factory=SimulationBlock)
    seed: Optional[int] = None
    out: Optional[str] = None

    @field_validator("unfolding")
    @classmethod
    def _distinct(cls, value: List[str]) -> List[str]:
        if len(set(value)) != len(value):
            raise ValueError("unfolding parameters must be distinct")
        return value

    # Resolution against a model

    def example(self, model: DelayModel) -> Dict[str, Any]:
        if self.point.example is None:
            return {}
        if self.point.example not in model.examples:
            raise ConfigError(
                f"model {model.name} has no example '{self.point.example}'",
                {"available": sorted(model.examples)},
            )
        return model.examples[self.point.example]

    def parameter_vector(self, model: DelayModel) -> np.ndarray:
        values = self.parameters if self.parameters is not None else self.example(model).get("parameters")
        if values is None:
            raise ConfigError("no parameter vector given and no example point selected")
        if len(values) != model.p:
            raise ConfigError("parameter vector has wrong length",
                              {"expected": list(model.parameter_names), "got": list(values)})
        alpha = np.asarray(values, dtype=float)
        for name, value in self.set_parameters.items():
            alpha[self.index(model, name)] = value
        return alpha

    def state(self, model: DelayModel) -> np.ndarray:
        values = self.point.state if self.point.state is not None else self.example(model).get("state")
        if values is None:
            values = [0.0] * model.n
        if len(values) != model.n:
            raise ConfigError("state guess has wrong length", {"expected": model.n, "got": list(values)})
        return np.asarray(values, dtype=float)

    def omegas(self, model: DelayModel) -> List[float]:
        if self.point.omegas:
            return list(self.point.omegas)
        if self.point.omega is not None:
            return [self.point.omega]
        ex = self.example(model)
        if "omegas" in ex:
            return list(ex["omegas"])
        return [ex["omega"]] if "omega" in ex else []

    def index(self, model: DelayModel, name: str) -> int:
        if name not in model.parameter_names:
            raise ConfigError(f"unknown parameter '{name}' for model {model.name}",
                              {"parameters": list(model.parameter_names)})
        return model.parameter_names.index(name)

    def unfolding_indices(self, model: DelayModel) -> Tuple[int, int]:
        if len(self.unfolding) != 2:
            raise ConfigError("exactly two unfolding parameters are required", {"unfolding": self.unfolding})
        first, second = (self.index(model, name) for name in self.unfolding)
        return first, second

    def free_indices(self, model: DelayModel) -> List[int]:
        names = self.continuation.free or self.unfolding
        return [self.index(model, name) for name in names]

    def box(self, model: DelayModel) -> Dict[int, Tuple[float, float]]:
        return {self.index(model, name): tuple(bounds) for name, bounds in self.continuation.box.items()}

    def check(self, model: DelayModel, command: str):
        """Cross-field invariants that need the model"""
        self.parameter_vector(model)
        self.state(model)
        names = [*self.unfolding, *self.set_parameters, *self.continuation.free, *self.continuation.seed_offset]
        for name in names:
            self.index(model, name)
        if self.point.free is not None:
            self.index(model, self.point.free)
        self.box(model)
        if command in CODIM2_COMMANDS and (self.point.kind in CODIM2_KINDS or command == "predict"):
            self.unfolding_indices(model)
        if command == "continue":
            expected = 1 if self.continuation.problem == "equilibrium" else 2
            if len(self.free_indices(model)) != expected:
                raise ConfigError(f"{self.continuation.problem} continuation needs {expected} free parameter(s)",
                                  {"free": self.continuation.free or self.unfolding})


# Loading

def parse_override(text: str) -> Tuple[List[str], Any]:
    """'a.b.c=value' -> (['a', 'b', 'c'], value); JSON values when they parse"""
    if "=" not in text:
        raise ConfigError(f"override '{text}' is not of the form key=value")
    key, raw = text.split("=", 1)
    path = [part for part in key.strip().split(".") if part]
    if not path:
        raise ConfigError(f"override '{text}' has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(document: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    for text in overrides:
        path, value = parse_override(text)
        node = document
        for part in path[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            if not isinstance(child, dict):
                raise ConfigError(f"override '{text}' descends into a non-object field", {"field": part})
            node = child
        node[path[-1]] = value
    return document


def load_config(path: str, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Read a JSON run configuration, apply --set overrides and validate it

    Raises:
        ConfigError: missing file or malformed JSON
        pydantic.ValidationError: schema violations
    """
    file = Path(path)
    if not file.exists():
        raise ConfigError(f"Config not found: {path}")
    try:
        document = json.loads(file.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config is not valid JSON: {exc}", {"path": str(file)}) from None
    if not isinstance(document, dict):
        raise ConfigError("Config must be a JSON object", {"path": str(file)})
    return RunConfig.model_validate(apply_overrides(document, overrides))
