"""HTTP front end: one POST route per entry of ``api.ROUTES``.

Run with ``uvicorn hofa.service:app``.
"""

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__, api


class HealthResponse(BaseModel):
    status: str
    version: str


def _endpoint(handler, model):
    def endpoint(req: model):  # type: ignore[valid-type]
        try:
            return handler(req)
        except api.InputError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    return endpoint


def create_app() -> FastAPI:
    app = FastAPI(title="hofa", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    for name, (path, model, handler) in api.ROUTES.items():
        app.add_api_route(path, _endpoint(handler, model), methods=["POST"], name=name,
                          response_model=api.response_model(name))
    return app


app = create_app()
