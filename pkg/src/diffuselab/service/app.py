"""HTTP service around the diffuse-domain laboratory.

Each endpoint is a stateless computation: the request carries the full
problem and experiment description, the response is the completed report.
Invalid problems (geometry, coefficients, expressions, eps lists) map to
HTTP 422 with a human-readable detail string.
"""

from __future__ import annotations

import dataclasses

from fastapi import FastAPI, HTTPException

from .. import __version__, expr as ex
from ..harness import (
    DegenerateData,
    SweepError,
    eps_sweep,
    gamma_recovery_check,
    lemma_checks,
)
from ..geometry import GeometryError
from .schemas import (
    BadProblem,
    HealthResponse,
    LemmaResponse,
    RecoveryResponse,
    RunRequest,
    SweepResponse,
    build_spec,
)

_CLIENT_ERRORS = (BadProblem, SweepError, DegenerateData, GeometryError, ValueError)


def _run(fn, *args, **kwargs):
    try:
        return dataclasses.asdict(fn(*args, **kwargs))
    except _CLIENT_ERRORS as err:
        raise HTTPException(status_code=422, detail=str(err)) from None


def create_app() -> FastAPI:
    app = FastAPI(
        title="diffuselab",
        version=__version__,
        description="Diffuse-domain approximation of a two-sided transmission problem",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/solve", response_model=SweepResponse)
    def solve(req: RunRequest):
        spec = _guarded_spec(req)
        e = req.experiment
        return _run(eps_sweep, spec, e.eps, e.rho, e.max_nodes, e.tol,
                    with_reference=False)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: RunRequest):
        spec = _guarded_spec(req)
        e = req.experiment
        return _run(eps_sweep, spec, e.eps, e.rho, e.max_nodes, e.tol)

    @app.post("/gamma-check", response_model=RecoveryResponse)
    def gamma_check(req: RunRequest):
        spec = _guarded_spec(req)
        e = req.experiment
        if e.u is None:
            raise HTTPException(422, detail="gamma-check needs a candidate expression u")
        try:
            u_expr = ex.parse(e.u)
        except ex.ExprSyntaxError as err:
            raise HTTPException(422, detail=f"bad expression for u: {err}") from None
        return _run(gamma_recovery_check, spec, u_expr, e.eps, e.rho, e.max_nodes)

    @app.post("/lemma-check", response_model=LemmaResponse)
    def lemma_check(req: RunRequest):
        spec = _guarded_spec(req)
        e = req.experiment
        return _run(lemma_checks, spec, e.eps, e.rho, max(e.max_nodes, 1_000_000))

    return app


def _guarded_spec(req: RunRequest):
    try:
        return build_spec(req.problem)
    except BadProblem as err:
        raise HTTPException(status_code=422, detail=str(err)) from None


app = create_app()
