"""FastAPI wrapper around the core solvers.

The CLI talks to this app in-process by default (ASGI transport), so the same
request/response path is exercised whether or not a real server is running.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError, resolve_config, validate_config
from ..hilbert import StateValidationError
from ..liouvillian import IntegrationError, SteadyStateError
from ..runner import params_summary, run_experiment
from .models import (
    HealthResponse,
    ParamsResponse,
    RunRequest,
    RunResponse,
    TableModel,
    ValidateRequest,
    ValidateResponse,
)

_SOLVER_ERRORS = (IntegrationError, SteadyStateError, StateValidationError, ValueError)


def create_app() -> FastAPI:
    app = FastAPI(title="nmcool service", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest) -> ValidateResponse:
        return ValidateResponse(**validate_config(req.config))

    @app.post("/params", response_model=ParamsResponse)
    def params(req: ValidateRequest) -> ParamsResponse:
        cfg = dict(req.config)
        cfg["mode"] = "params"
        # params mode needs no mode-specific block; drop any that came along
        for key in ("cool", "sweep", "qswitch", "dispersion", "steady"):
            cfg.pop(key, None)
        try:
            exp = resolve_config(cfg)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail={"path": exc.path, "message": exc.message})
        return ParamsResponse(
            params={
                f: getattr(exp.params, f)
                for f in ("omega_0", "detuning", "G_h", "kappa_0", "kappa_h", "n_th")
            },
            provenance=exp.provenance,
            summary=params_summary(exp),
        )

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            exp = resolve_config(req.config)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail={"path": exc.path, "message": exc.message})
        try:
            result = run_experiment(exp, jobs=req.jobs)
        except _SOLVER_ERRORS as exc:
            raise HTTPException(
                status_code=500,
                detail={"error": type(exc).__name__, "message": str(exc)},
            )
        return RunResponse(
            mode=result.mode,
            output_prefix=exp.output_prefix,
            tables=[TableModel(name=t.name, header=t.header, rows=t.rows) for t in result.tables],
            metadata=result.metadata,
            summary=result.summary,
        )

    return app


app = create_app()
