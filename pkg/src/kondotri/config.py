"""Run configuration: schema-validated sections plus grid-spec parsing.

A run is driven by a single JSON config file (any section may be omitted and
defaults apply), with CLI flags overriding individual fields.  Unknown keys
are rejected.  The metadata emitted with every run is the fully resolved
config — every defaulted parameter appears explicitly — and re-parses into
an equivalent ``RunConfig``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from . import __version__
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, DENSE_ORACLE_CAP
from .entanglement import DEFAULT_KEPT_CAP


def parse_grid_spec(spec: str) -> tuple[float, ...]:
    """Parse "min:max:count[:log]" into an explicit grid."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ValueError(f"grid spec {spec!r} is not min:max:count[:log]")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"grid spec {spec!r} has non-numeric fields") from None
    if count < 1:
        raise ValueError(f"grid spec {spec!r}: count must be >= 1")
    if len(parts) == 4:
        if parts[3] != "log":
            raise ValueError(f"grid spec {spec!r}: trailing token must be 'log'")
        if lo <= 0 or hi <= 0:
            raise ValueError(f"grid spec {spec!r}: log grid needs positive endpoints")
        return tuple(np.geomspace(lo, hi, count).tolist())
    return tuple(np.linspace(lo, hi, count).tolist())


class ModelSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["2ikm", "2ckm"] = "2ikm"
    j_prime: list[float] = [0.4]
    sizes: list[int] = [8, 12]
    j2_ratio: float = 0.2412

    @field_validator("sizes")
    @classmethod
    def _sizes_nonempty(cls, v):
        if not v:
            raise ValueError("sizes must not be empty")
        return v

    @model_validator(mode="after")
    def _sizes_parity(self):
        want_odd = self.kind == "2ckm"
        for n in self.sizes:
            if n % 2 != (1 if want_odd else 0):
                raise ValueError(
                    f"sizes: {n} must be {'odd' if want_odd else 'even'} for kind={self.kind}"
                )
        return self


class GridSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    spec: str | None = "0.05:2.0:20:log"
    values: list[float] | None = None

    def resolve(self) -> tuple[float, ...]:
        if self.values is not None:
            return tuple(float(g) for g in self.values)
        if self.spec is None:
            raise ValueError("grid section needs either 'spec' or 'values'")
        return parse_grid_spec(self.spec)


class SolverSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0
    workers: int = 1
    dense_oracle_cap: int = DENSE_ORACLE_CAP
    rdm_cap: int = DEFAULT_KEPT_CAP


class AnalysisSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    measures: list[Literal["e1", "e2", "negativities"]] = ["e1", "e2"]
    measure: Literal["e1", "e2"] = "e1"
    gc_policy: str = "peak"
    restarts: int = 8

    @field_validator("gc_policy")
    @classmethod
    def _check_policy(cls, v: str) -> str:
        if v in ("peak", "fit"):
            return v
        if v.startswith("fixed="):
            try:
                float(v.split("=", 1)[1])
            except ValueError:
                raise ValueError(f"gc_policy {v!r}: fixed= needs a number") from None
            return v
        raise ValueError(f"gc_policy must be peak, fit, or fixed=VALUE, got {v!r}")

    def gc_mode(self) -> tuple[str, float | None]:
        """("peak"|"fit"|"fixed", value-if-fixed)."""
        if self.gc_policy.startswith("fixed="):
            return "fixed", float(self.gc_policy.split("=", 1)[1])
        return self.gc_policy, None


class IoSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    out_dir: str = "runs"


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelSection = ModelSection()
    grid: GridSection = GridSection()
    solver: SolverSection = SolverSection()
    analysis: AnalysisSection = AnalysisSection()
    io: IoSection = IoSection()


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    return RunConfig.model_validate(json.loads(text))


CONVENTION_NOTES = {
    "negativity": "N = sum_k |lambda_k| - 1 (trace norm minus one, unhalved)",
    "log_negativity": "log(2N + 1), natural log",
    "clamping": "negativities in [-1e-10, 0) report as 0; pi terms are averaged raw",
    "energy_unit": "J1 = 1",
}


def run_metadata(config: RunConfig) -> dict:
    """Fully resolved run metadata; config round-trips through this dict."""
    return {
        "config": config.model_dump(),
        "seed": config.solver.seed,
        "conventions": CONVENTION_NOTES,
        "tool": {"name": "kondotri", "version": __version__},
    }
