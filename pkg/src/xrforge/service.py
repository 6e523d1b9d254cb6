"""HTTP service exposing the model, configurator, and generator.

All request and response bodies are JSON. Validation outcomes are data, so
/api/validate answers 200 even when diagnostics are non-empty; 422 is
reserved for refusing to act (generation on an invalid configuration,
enumeration beyond the search guard); malformed bodies get 400. The model
is loaded once at startup and shared read-only, so request handling is
safely concurrent and stateless.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .configurator import (
    ValidationMode,
    config_from_object,
    config_to_object,
    enumerate_completions,
    propagate,
    validate,
)
from .defaults import (
    DEFAULT_CORS_ORIGIN,
    DEFAULT_LISTEN_ADDRESS,
    DEFAULT_RUNTIME_URL,
)
from .errors import (
    DocumentSyntaxError,
    InvalidConfiguration,
    ModelMismatch,
    ModelTooLarge,
    StructureError,
    UnknownModel,
    XRForgeError,
)
from .generator import GenerationOptions, generate, manifest_to_object
from .model import FeatureModel, parse_model, serialize_model
from .webxr import builtin_webxr_model

BUILTIN_MODEL_PATH = "builtin"
MAX_ENUMERATE_LIMIT = 10_000
DEFAULT_ENUMERATE_LIMIT = 100

ENV_LISTEN_ADDRESS = "XRFORGE_LISTEN_ADDRESS"
ENV_MODEL_PATH = "XRFORGE_MODEL_PATH"


@dataclass(frozen=True)
class ServiceConfig:
    listen_address: str = DEFAULT_LISTEN_ADDRESS
    model_path: str = BUILTIN_MODEL_PATH
    aframe_runtime_url: str = DEFAULT_RUNTIME_URL
    cors_allowed_origin: str = DEFAULT_CORS_ORIGIN

    def host_port(self) -> tuple[str, int]:
        host, sep, port_text = self.listen_address.rpartition(":")
        if not sep or not host:
            raise XRForgeError(
                f"listen address {self.listen_address!r} must look like host:port"
            )
        try:
            port = int(port_text)
        except ValueError:
            port = -1
        if not 0 < port < 65536:
            raise XRForgeError(f"listen address has invalid port {port_text!r}")
        return host, port


def load_service_config(path: str | None = None) -> ServiceConfig:
    """Build the service configuration from an optional JSON file plus
    environment overrides (XRFORGE_LISTEN_ADDRESS, XRFORGE_MODEL_PATH)."""
    config = ServiceConfig()
    if path is not None:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DocumentSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
        if not isinstance(obj, dict):
            raise StructureError("service config must be an object")
        allowed = {"listen_address", "model_path", "aframe_runtime_url", "cors_allowed_origin"}
        for key, value in obj.items():
            if key not in allowed:
                raise StructureError(f"unknown service config key {key!r}")
            if not isinstance(value, str):
                raise StructureError(f"service config key {key!r} must be a string")
        config = replace(config, **obj)

    listen = os.environ.get(ENV_LISTEN_ADDRESS)
    if listen:
        config = replace(config, listen_address=listen)
    model_path = os.environ.get(ENV_MODEL_PATH)
    if model_path:
        config = replace(config, model_path=model_path)
    config.host_port()
    return config


def load_model(config: ServiceConfig) -> FeatureModel:
    if config.model_path == BUILTIN_MODEL_PATH:
        return builtin_webxr_model()
    return parse_model(Path(config.model_path).read_text(encoding="utf-8"))


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


async def _json_body(request: Request) -> dict:
    raw = await request.body()
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(obj, dict):
        raise StructureError("request body must be a JSON object")
    return obj


def build_app(service_config: ServiceConfig | None = None,
              model: FeatureModel | None = None) -> FastAPI:
    """Assemble the application; ``model`` overrides the configured source."""
    service_config = service_config or ServiceConfig()
    if model is None:
        model = load_model(service_config)
    model_document = serialize_model(model)

    app = FastAPI(title="xrforge", docs_url=None, redoc_url=None, openapi_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[service_config.cors_allowed_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/healthz")
    async def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.get("/api/model")
    async def api_model() -> Response:
        return Response(content=model_document, media_type="application/json")

    @app.post("/api/validate")
    async def api_validate(request: Request):
        try:
            body = await _json_body(request)
            if "config" not in body:
                return _error(400, "missing 'config'")
            config = config_from_object(body["config"], model)
            try:
                mode = ValidationMode(body.get("mode", "complete"))
            except ValueError:
                return _error(400, f"unknown mode {body.get('mode')!r}")
            diagnostics = validate(model, config, mode)
        except (DocumentSyntaxError, StructureError, ModelMismatch) as exc:
            return _error(400, str(exc))
        return JSONResponse({"diagnostics": [d.to_object() for d in diagnostics]})

    @app.post("/api/propagate")
    async def api_propagate(request: Request):
        try:
            body = await _json_body(request)
            if "config" not in body:
                return _error(400, "missing 'config'")
            config = config_from_object(body["config"], model)
            result = propagate(model, config)
        except (DocumentSyntaxError, StructureError, ModelMismatch) as exc:
            return _error(400, str(exc))
        payload = {
            "configuration": config_to_object(result.configuration),
            "forced": [f.to_object() for f in result.forced],
        }
        if result.conflict is not None:
            payload["conflict"] = result.conflict.to_object()
        return JSONResponse(payload)

    @app.post("/api/enumerate")
    async def api_enumerate(request: Request):
        try:
            body = await _json_body(request)
            config = None
            if body.get("config") is not None:
                config = config_from_object(body["config"], model)
            limit = body.get("limit", DEFAULT_ENUMERATE_LIMIT)
            if isinstance(limit, bool) or not isinstance(limit, int) or limit < 0:
                return _error(400, "'limit' must be a non-negative integer")
            if limit > MAX_ENUMERATE_LIMIT:
                return _error(400, f"'limit' may not exceed {MAX_ENUMERATE_LIMIT}")
            result = enumerate_completions(model, config, limit=limit)
        except (DocumentSyntaxError, StructureError, ModelMismatch) as exc:
            return _error(400, str(exc))
        except ModelTooLarge as exc:
            return _error(422, str(exc))
        return JSONResponse({
            "count": result.total,
            "truncated": result.truncated,
            "configurations": [config_to_object(c) for c in result.configurations],
        })

    @app.post("/api/generate")
    async def api_generate(request: Request):
        try:
            body = await _json_body(request)
            if "config" not in body:
                return _error(400, "missing 'config'")
            config = config_from_object(body["config"], model)
            raw_options = body.get("options", {})
            if not isinstance(raw_options, dict):
                return _error(400, "'options' must be an object")
            allowed = {"app_title", "author", "include_demo_objects"}
            unknown = set(raw_options) - allowed
            if unknown:
                return _error(400, f"unknown option keys: {', '.join(sorted(unknown))}")
            title = raw_options.get("app_title", GenerationOptions.app_title)
            author = raw_options.get("author")
            demo = raw_options.get("include_demo_objects", True)
            if not isinstance(title, str) or not title:
                return _error(400, "'app_title' must be a non-empty string")
            if author is not None and not isinstance(author, str):
                return _error(400, "'author' must be a string")
            if not isinstance(demo, bool):
                return _error(400, "'include_demo_objects' must be a boolean")
            options = GenerationOptions(
                app_title=title,
                author=author,
                include_demo_objects=demo,
                runtime_url=service_config.aframe_runtime_url,
            )
            artifact = generate(model, config, options)
        except (DocumentSyntaxError, StructureError, ModelMismatch) as exc:
            return _error(400, str(exc))
        except InvalidConfiguration as exc:
            return JSONResponse(
                {
                    "error": str(exc),
                    "diagnostics": [d.to_object() for d in exc.diagnostics],
                },
                status_code=422,
            )
        except UnknownModel as exc:
            return _error(422, str(exc))
        return JSONResponse({
            "document": artifact.document,
            "manifest": manifest_to_object(artifact.manifest),
        })

    return app


def serve(service_config: ServiceConfig) -> None:
    """Run the service until terminated; raises on startup problems."""
    import uvicorn

    model = load_model(service_config)
    app = build_app(service_config, model=model)
    host, port = service_config.host_port()
    uvicorn.run(app, host=host, port=port, log_level="warning")
