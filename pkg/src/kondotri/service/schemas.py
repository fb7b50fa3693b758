"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict

from ..config import RunConfig


class HealthResponse(BaseModel):
    name: str
    version: str


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig


class SweepResponse(BaseModel):
    csv: str
    metadata: dict
    n_records: int
    n_failed: int
    sha256: str


class FitRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["power", "collapse", "ansatz", "identity"]
    csv: str | None = None          # dataset content for power/collapse/ansatz
    measure: Literal["e1", "e2"] = "e1"
    gc_policy: str = "peak"
    restarts: int = 8
    report: dict | None = None      # an existing fit report, for identity mode
    beta: float | None = None       # explicit exponents, alternative identity input
    nu: float | None = None
    lam: float | None = None


class FitResponse(BaseModel):
    report: dict
    rescaled_csv: str | None = None


class SynthRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["ansatz6", "collapse7"]
    params: dict
    sizes: list[float]
    grid: list[float]
    noise: float = 0.0
    seed: int = 0
    measure: Literal["e1", "e2"] = "e1"
    model: Literal["2ikm", "2ckm"] = "2ikm"
    j_prime: float = 0.4


class SynthResponse(BaseModel):
    csv: str
    metadata: dict


class OracleCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_configs: int = 20
    seed: int = 0
    dense_cap: int = 4096
    corrupt_matrix_element: bool = False  # fault-injection test hook


class CheckItem(BaseModel):
    name: str
    passed: bool
    detail: str


class OracleCheckResponse(BaseModel):
    passed: bool
    checks: list[CheckItem]
