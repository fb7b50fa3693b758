"""FastAPI service wrapping the core package.

All endpoints are pure: datasets travel inside the request/response bodies,
nothing is persisted server-side, and no state is shared between requests, so
the service is safe for concurrent clients.  The CLI is a thin client of
exactly these endpoints (in-process by default, remote with --server).
"""

from __future__ import annotations

import hashlib

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..checks import run_oracle_checks
from ..config import run_metadata
from ..dataset import dataset_text, parse_dataset_text
from ..errors import (
    ConvergenceError,
    DatasetParseError,
    IllConditionedFitError,
    KondotriError,
    NegativityDomainError,
    OptimizationError,
    SweepError,
)
from ..runner import fit_records, identity_report, sweep_from_config, synth_records
from .schemas import (
    CheckItem,
    FitRequest,
    FitResponse,
    HealthResponse,
    OracleCheckRequest,
    OracleCheckResponse,
    SweepRequest,
    SweepResponse,
    SynthRequest,
    SynthResponse,
)

# Errors a client should treat as numerical failures rather than bad usage.
NUMERICAL_ERRORS = (
    ConvergenceError,
    OptimizationError,
    SweepError,
    IllConditionedFitError,
    NegativityDomainError,
)


def create_app() -> FastAPI:
    app = FastAPI(title="kondotri", version=__version__)

    @app.exception_handler(KondotriError)
    async def _domain_error(request, exc: KondotriError):
        kind = "numerical" if isinstance(exc, NUMERICAL_ERRORS) else "usage"
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "kind": kind, "message": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "kind": "usage", "message": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(name="kondotri", version=__version__)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        records, metadata = sweep_from_config(req.config)
        text = dataset_text(records)
        return SweepResponse(
            csv=text,
            metadata=metadata,
            n_records=len(records),
            n_failed=sum(1 for r in records if not r.converged),
            sha256=hashlib.sha256(text.encode()).hexdigest(),
        )

    @app.post("/fit", response_model=FitResponse)
    def fit(req: FitRequest) -> FitResponse:
        if req.mode == "identity":
            if req.report is not None:
                src = req.report
                beta, nu, lam = src.get("beta"), src.get("nu"), src.get("lambda")
            else:
                beta, nu, lam = req.beta, req.nu, req.lam
            if beta is None or nu is None or lam is None:
                raise DatasetParseError(
                    "identity mode needs beta, nu, and lambda (inline or via a report)"
                )
            return FitResponse(report=identity_report(beta, nu, lam))
        if req.csv is None:
            raise DatasetParseError(f"{req.mode} mode needs dataset csv content")
        records = parse_dataset_text(req.csv, source="<request>")
        gc_mode, gc_value = "peak", None
        if req.gc_policy == "fit":
            gc_mode = "fit"
        elif req.gc_policy.startswith("fixed="):
            gc_mode, gc_value = "fixed", float(req.gc_policy.split("=", 1)[1])
        elif req.gc_policy != "peak":
            raise DatasetParseError(f"gc_policy must be peak, fit, or fixed=V, got {req.gc_policy!r}")
        report, rescaled = fit_records(
            records, req.mode, measure=req.measure,
            gc_mode=gc_mode, gc_value=gc_value, restarts=req.restarts,
        )
        return FitResponse(report=report, rescaled_csv=rescaled)

    @app.post("/synth", response_model=SynthResponse)
    def synth(req: SynthRequest) -> SynthResponse:
        records = synth_records(
            kind=req.kind, params=req.params, sizes=req.sizes, grid=req.grid,
            noise=req.noise, seed=req.seed, measure=req.measure,
            model=req.model, j_prime=req.j_prime,
        )
        metadata = {
            "synthetic": {
                "kind": req.kind, "params": req.params, "sizes": req.sizes,
                "grid": req.grid, "noise": req.noise, "seed": req.seed,
                "measure": req.measure,
            },
            "tool": {"name": "kondotri", "version": __version__},
        }
        return SynthResponse(csv=dataset_text(records), metadata=metadata)

    @app.post("/oracle-check", response_model=OracleCheckResponse)
    def oracle_check(req: OracleCheckRequest) -> OracleCheckResponse:
        results = run_oracle_checks(
            n_configs=req.n_configs,
            seed=req.seed,
            dense_cap=req.dense_cap,
            corrupt_matrix_element=req.corrupt_matrix_element,
        )
        items = [CheckItem(name=r.name, passed=r.passed, detail=r.detail) for r in results]
        return OracleCheckResponse(passed=all(r.passed for r in results), checks=items)

    return app
