import json

import pytest
from fastapi.testclient import TestClient

from conftest import FIG8_SELECTED, complete_config
from xrforge import (
    Configuration,
    DocumentSyntaxError,
    Feature,
    FeatureKind,
    Optionality,
    StructureError,
    XRForgeError,
    build_model,
    config_to_object,
    serialize_model,
)
from xrforge.service import (
    ServiceConfig,
    build_app,
    load_model,
    load_service_config,
)

O, M = Optionality.OPTIONAL, Optionality.MANDATORY


@pytest.fixture(scope="module")
def client():
    return TestClient(build_app())


@pytest.fixture(scope="module")
def fig8_body():
    fig8 = complete_config(builtin_model(), FIG8_SELECTED)
    return {"config": config_to_object(fig8)}


def builtin_model():
    from xrforge import builtin_webxr_model
    return builtin_webxr_model()


class TestServiceConfig:
    def test_defaults(self):
        config = load_service_config(None)
        assert config.listen_address == "127.0.0.1:8571"
        assert config.model_path == "builtin"

    def test_file_values_and_env_overrides(self, tmp_path, monkeypatch):
        path = tmp_path / "svc.json"
        path.write_text(json.dumps({
            "listen_address": "0.0.0.0:9000",
            "aframe_runtime_url": "https://example.test/rt.js",
        }), encoding="utf-8")
        monkeypatch.setenv("XRFORGE_LISTEN_ADDRESS", "127.0.0.1:9001")
        monkeypatch.setenv("XRFORGE_MODEL_PATH", str(tmp_path / "m.json"))
        (tmp_path / "m.json").write_text(serialize_model(builtin_model()), encoding="utf-8")
        config = load_service_config(str(path))
        assert config.listen_address == "127.0.0.1:9001"
        assert config.model_path == str(tmp_path / "m.json")
        assert config.aframe_runtime_url == "https://example.test/rt.js"
        assert load_model(config).root == "web-xr-app"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "svc.json"
        path.write_text('{"port": 80}', encoding="utf-8")
        with pytest.raises(StructureError, match="unknown service config key"):
            load_service_config(str(path))

    def test_malformed_file_rejected(self, tmp_path):
        path = tmp_path / "svc.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(DocumentSyntaxError):
            load_service_config(str(path))

    def test_bad_listen_address_rejected(self):
        with pytest.raises(XRForgeError, match="host:port"):
            ServiceConfig(listen_address="localhost").host_port()
        with pytest.raises(XRForgeError, match="invalid port"):
            ServiceConfig(listen_address="localhost:http").host_port()
        assert ServiceConfig(listen_address="0.0.0.0:8080").host_port() == ("0.0.0.0", 8080)


class TestModelEndpoints:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.text == "ok"

    def test_model_document_is_canonical_bytes(self, client, model):
        response = client.get("/api/model")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("application/json")
        assert response.content == serialize_model(model).encode("utf-8")

    def test_cors_header_present(self, client):
        response = client.get("/api/model", headers={"Origin": "https://editor.test"})
        assert response.headers["access-control-allow-origin"] == "*"


class TestValidateEndpoint:
    def test_valid_configuration(self, client, fig8_body):
        response = client.post("/api/validate", json=fig8_body)
        assert response.status_code == 200
        assert response.json() == {"diagnostics": []}

    def test_violations_are_data_not_errors(self, client, model):
        config = complete_config(builtin_model(), FIG8_SELECTED - {"wearable"})
        response = client.post("/api/validate", json={"config": config_to_object(config)})
        assert response.status_code == 200
        diagnostics = response.json()["diagnostics"]
        assert diagnostics == [{
            "rule": "RequiresViolated",
            "features": ["tactile", "wearable"],
            "message": "'tactile' requires 'wearable', which is deselected",
        }]

    def test_partial_mode(self, client):
        config = Configuration(builtin_model(), {"tactile": "selected"})
        body = {"config": config_to_object(config), "mode": "partial"}
        assert client.post("/api/validate", json=body).json() == {"diagnostics": []}

    def test_unknown_mode_rejected(self, client, fig8_body):
        response = client.post("/api/validate", json={**fig8_body, "mode": "strict"})
        assert response.status_code == 400
        assert "unknown mode" in response.json()["error"]

    def test_missing_config_rejected(self, client):
        response = client.post("/api/validate", json={})
        assert response.status_code == 400

    def test_malformed_body_rejected(self, client):
        response = client.post("/api/validate", content=b"{oops",
                               headers={"content-type": "application/json"})
        assert response.status_code == 400
        assert "error" in response.json()

    def test_model_mismatch_rejected(self, client, fig8_body):
        body = {"config": {**fig8_body["config"], "model": "deadbeefdeadbeef"}}
        response = client.post("/api/validate", json=body)
        assert response.status_code == 400

    def test_requests_are_stateless(self, client, fig8_body):
        first = client.post("/api/validate", json=fig8_body)
        second = client.post("/api/validate", json=fig8_body)
        assert first.content == second.content


class TestPropagateEndpoint:
    def test_forced_decisions(self, client):
        config = Configuration(builtin_model(), {"tactile": "selected"})
        response = client.post("/api/propagate", json={"config": config_to_object(config)})
        assert response.status_code == 200
        payload = response.json()
        assert "conflict" not in payload
        assert {"feature": "wearable", "state": "selected",
                "rule": "RequiresViolated"} in payload["forced"]
        decided = {d["feature"] for d in payload["configuration"]["decisions"]}
        assert "web-xr-app" in decided

    def test_conflict_reported(self, client):
        config = Configuration(builtin_model(), {"tactile": "selected",
                                                 "wearable": "deselected"})
        response = client.post("/api/propagate", json={"config": config_to_object(config)})
        assert response.status_code == 200
        assert response.json()["conflict"]["rule"] == "RequiresViolated"


class TestEnumerateEndpoint:
    def test_default_limit(self, client):
        response = client.post("/api/enumerate", json={})
        assert response.status_code == 200
        payload = response.json()
        assert payload["count"] == 797880
        assert payload["truncated"] is True
        assert len(payload["configurations"]) == 100

    def test_explicit_limit_and_filter(self, client):
        config = Configuration(builtin_model(), {"interaction-events": "selected"})
        body = {"config": config_to_object(config), "limit": 3}
        payload = client.post("/api/enumerate", json=body).json()
        assert 0 < payload["count"] < 797880
        assert len(payload["configurations"]) == 3
        first = payload["configurations"][0]["decisions"]
        assert {"feature": "interaction-events", "state": "selected"} in first

    def test_limit_zero_counts_only(self, client):
        payload = client.post("/api/enumerate", json={"limit": 0}).json()
        assert payload["count"] == 797880
        assert payload["configurations"] == []

    def test_bad_limits_rejected(self, client):
        for limit in (-1, "ten", True, 10_001):
            response = client.post("/api/enumerate", json={"limit": limit})
            assert response.status_code == 400, limit

    def test_search_guard_answers_422(self):
        wide = build_model(
            [Feature("root", "Root", M, FeatureKind.INVARIABLE)]
            + [Feature(f"f{i}", f"F{i}", O, FeatureKind.INVARIABLE, parent="root")
               for i in range(30)]
        )
        client = TestClient(build_app(model=wide))
        response = client.post("/api/enumerate", json={})
        assert response.status_code == 422
        assert "guard" in response.json()["error"]


class TestGenerateEndpoint:
    def test_document_and_manifest(self, client, fig8_body):
        response = client.post("/api/generate", json=fig8_body)
        assert response.status_code == 200
        payload = response.json()
        assert 'hand-controls="hand: right"' in payload["document"]
        assert payload["manifest"]["entries"][0]["element"] == "a-scene"

    def test_options_respected(self, client, fig8_body):
        body = {**fig8_body, "options": {"app_title": "Showroom",
                                         "include_demo_objects": False}}
        document = client.post("/api/generate", json=body).json()["document"]
        assert "<title>Showroom</title>" in document
        assert "a-box" not in document

    def test_runtime_url_comes_from_service_config(self, fig8_body):
        service_config = ServiceConfig(aframe_runtime_url="https://example.test/rt.js")
        client = TestClient(build_app(service_config, model=builtin_model()))
        document = client.post("/api/generate", json=fig8_body).json()["document"]
        assert 'src="https://example.test/rt.js"' in document

    def test_incomplete_configuration_refused(self, client):
        config = Configuration(builtin_model(), {"tactile": "selected"})
        response = client.post("/api/generate", json={"config": config_to_object(config)})
        assert response.status_code == 422
        payload = response.json()
        assert "cannot generate" in payload["error"]
        assert isinstance(payload["diagnostics"], list)

    def test_invalid_complete_configuration_refused_with_diagnostics(self, client):
        config = complete_config(builtin_model(), FIG8_SELECTED - {"wearable"})
        response = client.post("/api/generate", json={"config": config_to_object(config)})
        assert response.status_code == 422
        assert response.json()["diagnostics"][0]["rule"] == "RequiresViolated"

    def test_unknown_option_keys_rejected(self, client, fig8_body):
        body = {**fig8_body, "options": {"theme": "dark"}}
        response = client.post("/api/generate", json=body)
        assert response.status_code == 400
        assert "theme" in response.json()["error"]

    def test_option_type_errors_rejected(self, client, fig8_body):
        cases = (
            {"app_title": ""},
            {"app_title": 7},
            {"author": 42},
            {"include_demo_objects": "yes"},
        )
        for options in cases:
            response = client.post("/api/generate", json={**fig8_body, "options": options})
            assert response.status_code == 400, options

    def test_model_without_rule_features_refused(self):
        toy = build_model([Feature("root", "Root", M, FeatureKind.INVARIABLE)])
        client = TestClient(build_app(model=toy))
        config = Configuration(toy, {"root": "selected"})
        response = client.post("/api/generate", json={"config": config_to_object(config)})
        assert response.status_code == 422
        assert "avatar" in response.json()["error"]
