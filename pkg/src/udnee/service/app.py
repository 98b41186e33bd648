"""FastAPI application exposing the analytics and simulation core."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import ConfigError, ConvergenceError, UdneeError
from . import handlers, schemas


def _http_status(exc: UdneeError) -> int:
    if isinstance(exc, ConfigError):
        return 422
    if isinstance(exc, ConvergenceError):
        return 500
    return 400


def create_app() -> FastAPI:
    app = FastAPI(
        title="udnee",
        description="Closed-form energy-efficiency analytics and Monte Carlo "
                    "simulation for user-centric handover in ultra-dense "
                    "cellular networks.",
        version="0.1.0",
    )

    @app.exception_handler(UdneeError)
    async def udnee_error_handler(request: Request, exc: UdneeError):
        detail = schemas.ErrorDetail(error_type=type(exc).__name__,
                                     message=str(exc), exit_code=exc.exit_code)
        return JSONResponse(status_code=_http_status(exc),
                            content={"detail": detail.model_dump()})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/defaults", response_model=schemas.ScenarioEcho)
    def defaults():
        return handlers.handle_defaults()

    @app.post("/analytics", response_model=schemas.AnalyticsResponse)
    def analytics_endpoint(req: schemas.AnalyticsRequest):
        params = handlers.resolve_params(req.overrides)
        return handlers.handle_analytics(params, t=req.t)

    @app.post("/check", response_model=schemas.CheckResponse)
    def check_endpoint(req: schemas.CheckRequest):
        params = handlers.resolve_params(req.overrides)
        return handlers.handle_check(params, threshold=req.threshold)

    @app.post("/episode", response_model=schemas.EpisodeResponse)
    def episode_endpoint(req: schemas.EpisodeRequest):
        params = handlers.resolve_params(req.overrides)
        return handlers.handle_episode(
            params, variant=req.variant, horizon=req.horizon, seed=req.seed,
            fixed_tx_power=req.fixed_tx_power, fading_mode=req.fading_mode,
            record_trace=req.record_trace)

    @app.post("/figures/{which}", response_model=schemas.FigureResponse)
    def figure_endpoint(which: str, req: schemas.FigureRequest):
        params = handlers.resolve_params(req.overrides)
        return handlers.handle_figure(params, which, seeds=req.seeds,
                                      horizon=req.horizon,
                                      fading_modes=tuple(req.fading_modes))

    return app
