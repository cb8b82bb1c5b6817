"""FastAPI application exposing runs, paired comparisons, and sweeps."""

from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, HTTPException

from ..policies import POLICY_NAMES
from ..runner import (
    render_compare_csv,
    render_sweep_csv,
    run_compare,
    run_scenario,
    run_sweep,
)
from ..sim import render_run_csv, run_payload
from .schemas import (
    CompareRequest,
    CompareResponse,
    RunRequest,
    RunResponse,
    SweepRequest,
    SweepResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="minmaxalloc",
        description="Online min-max resource allocation simulator",
        version="0.1.0",
    )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/policies")
    def policies() -> dict:
        return {"policies": list(POLICY_NAMES)}

    @app.post("/run", response_model=RunResponse)
    def run_endpoint(request: RunRequest) -> RunResponse:
        try:
            result = run_scenario(request.scenario)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return RunResponse(
            summary=asdict(result.summary),
            csv=render_run_csv(result, include_timing=request.timing_in_csv),
            payload=run_payload(result),
            checks_passed=result.checks_passed,
        )

    @app.post("/compare", response_model=CompareResponse)
    def compare_endpoint(request: CompareRequest) -> CompareResponse:
        try:
            results = run_compare(request.scenario, request.policies)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return CompareResponse(
            summaries={r.summary.algorithm: asdict(r.summary) for r in results},
            csv=render_compare_csv(results, include_timing=request.timing_in_csv),
            checks_passed=all(r.checks_passed for r in results),
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep_endpoint(request: SweepRequest) -> SweepResponse:
        try:
            rows = run_sweep(
                request.scenario,
                request.sweep,
                jobs=request.jobs,
                base_seed=request.base_seed,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return SweepResponse(
            rows=[asdict(r) for r in rows],
            csv=render_sweep_csv(rows),
            checks_passed=all(r.checks_passed for r in rows),
        )

    return app


app = create_app()
