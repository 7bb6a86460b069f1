"""HTTP front of the laboratory: one POST endpoint per command."""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from fastapi import FastAPI, HTTPException

from . import handlers
from .models import (
    CylinderRequest,
    CylinderResponse,
    HealthResponse,
    LpRequest,
    LpResponse,
    SliceRequest,
    SliceResponse,
    SweepRequest,
    SweepResponse,
    Torus3Request,
    Torus3Response,
    VerifyRequest,
    VerifyResponse,
)


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def create_app() -> FastAPI:
    app = FastAPI(title="systolab", version=_version())

    def guarded(handler, req):
        # domain validation errors (bad grids, degenerate configs) are
        # client errors, not server faults
        try:
            return handler(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", package="systolab", version=_version())

    @app.post("/slice", response_model=SliceResponse)
    def slice_view(req: SliceRequest) -> SliceResponse:
        return guarded(handlers.handle_slice, req)

    @app.post("/cylinder", response_model=CylinderResponse)
    def cylinder_view(req: CylinderRequest) -> CylinderResponse:
        return guarded(handlers.handle_cylinder, req)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep_view(req: SweepRequest) -> SweepResponse:
        return guarded(handlers.handle_sweep, req)

    @app.post("/torus3", response_model=Torus3Response)
    def torus3_view(req: Torus3Request) -> Torus3Response:
        return guarded(handlers.handle_torus3, req)

    @app.post("/lp", response_model=LpResponse)
    def lp_view(req: LpRequest) -> LpResponse:
        return guarded(handlers.handle_lp, req)

    @app.post("/verify", response_model=VerifyResponse)
    def verify_view(req: VerifyRequest) -> VerifyResponse:
        return guarded(handlers.handle_verify, req)

    return app


app = create_app()
