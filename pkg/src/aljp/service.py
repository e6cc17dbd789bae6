"""Read-only prediction service over preloaded artifacts.

Plain-JSON HTTP endpoints: ``GET /health``, ``GET /models``,
``POST /predict``. Artifacts are loaded once at startup into an immutable
registry, so concurrent requests need no locking. Errors come back as
``{"error": {"code", "message"}}`` with a matching status code.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .artifact import ModelArtifact, input_text, load_artifact, predict
from .errors import AljpError, InvalidInputError, NotFoundError

__all__ = [
    "Registry",
    "handle_predict",
    "model_listing",
    "PredictionServer",
    "serve",
]


class Registry:
    """Write-once mapping of model id to loaded artifact."""

    def __init__(self):
        self._artifacts: dict[str, ModelArtifact] = {}

    def add(self, model_id: str, artifact: ModelArtifact) -> None:
        if model_id in self._artifacts:
            raise AljpError(f"duplicate model id {model_id!r}")
        self._artifacts[model_id] = artifact

    def add_path(self, path, embedding_path=None) -> str:
        model_id = Path(path).stem
        suffix = 1
        unique = model_id
        while unique in self._artifacts:
            suffix += 1
            unique = f"{model_id}-{suffix}"
        self.add(unique, load_artifact(path, embedding_path=embedding_path))
        return unique

    def get(self, model_id: str) -> ModelArtifact:
        if model_id not in self._artifacts:
            raise NotFoundError(f"unknown model id {model_id!r}")
        return self._artifacts[model_id]

    def items(self):
        return sorted(self._artifacts.items())


def model_listing(registry: Registry) -> list:
    return [
        {
            "id": model_id,
            "task": artifact.task,
            "case_type": artifact.case_type,
            "family": artifact.family,
            "classes": [
                {"name": c.name, "gloss": c.gloss} for c in artifact.catalog.classes
            ],
        }
        for model_id, artifact in registry.items()
    ]


def handle_predict(request: dict, registry: Registry) -> dict:
    """Validate a prediction request and run the referenced artifact's pipeline."""
    if not isinstance(request, dict):
        raise InvalidInputError("request body must be a JSON object")
    model_id = request.get("model_id")
    if not model_id:
        raise InvalidInputError("request is missing model_id")
    artifact = registry.get(model_id)
    texts = {}
    for fieldname in ("claim", "answer", "pleading"):
        value = request.get(fieldname)
        if value is None:
            value = ""
        if not isinstance(value, str):
            raise InvalidInputError(f"field {fieldname!r} must be a string")
        texts[fieldname] = value
    claim, answer, pleading = texts["claim"], texts["answer"], texts["pleading"]
    text = input_text(artifact, claim=claim, answer=answer, pleading=pleading)
    outcome = predict(artifact, text)
    classes = artifact.catalog.classes
    response = {
        "model_id": model_id,
        "task": artifact.task,
        "case_type": artifact.case_type,
        "predicted_class": classes[outcome["class_index"]].name,
        "predicted_gloss": classes[outcome["class_index"]].gloss,
        "probabilities": [
            {"name": c.name, "gloss": c.gloss, "probability": float(p)}
            for c, p in zip(classes, outcome["probabilities"])
        ],
        "token_count": outcome["token_count"],
    }
    evidence_id = request.get("evidence_model_id")
    if evidence_id:
        evidence_artifact = registry.get(evidence_id)
        evidence_text = input_text(
            evidence_artifact, claim=claim, answer=answer, pleading=pleading
        )
        evidence_outcome = predict(evidence_artifact, evidence_text)
        eclasses = evidence_artifact.catalog.classes
        response["evidence"] = {
            "model_id": evidence_id,
            "predicted_class": eclasses[evidence_outcome["class_index"]].name,
            "predicted_gloss": eclasses[evidence_outcome["class_index"]].gloss,
            "probabilities": [
                {"name": c.name, "gloss": c.gloss, "probability": float(p)}
                for c, p in zip(eclasses, evidence_outcome["probabilities"])
            ],
        }
    return response


def _error_body(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


class _Handler(BaseHTTPRequestHandler):
    registry: Registry = None  # set by PredictionServer

    def _send(self, status: int, body: dict) -> None:
        data = json.dumps(body, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def do_OPTIONS(self):
        self._send(204, {})

    def do_GET(self):
        if self.path == "/health":
            self._send(200, {"status": "ok"})
        elif self.path == "/models":
            self._send(200, {"models": model_listing(self.registry)})
        else:
            self._send(404, _error_body("not_found", f"no route {self.path!r}"))

    def do_POST(self):
        if self.path != "/predict":
            self._send(404, _error_body("not_found", f"no route {self.path!r}"))
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            request = json.loads(raw.decode("utf-8")) if raw else {}
        except (ValueError, UnicodeDecodeError):
            self._send(400, _error_body("bad_request", "body is not valid JSON"))
            return
        try:
            response = handle_predict(request, self.registry)
        except NotFoundError as exc:
            self._send(404, _error_body("not_found", str(exc)))
        except InvalidInputError as exc:
            self._send(422, _error_body("invalid_input", str(exc)))
        except AljpError as exc:
            self._send(400, _error_body("bad_request", str(exc)))
        except Exception as exc:  # pragma: no cover - defensive
            self._send(500, _error_body("internal", f"{type(exc).__name__}: {exc}"))
        else:
            self._send(200, response)


class PredictionServer:
    """Threading HTTP server bound to an immutable registry."""

    def __init__(self, registry: Registry, host: str = "127.0.0.1", port: int = 0):
        handler = type("BoundHandler", (_Handler,), {"registry": registry})
        self._server = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple:
        return self._server.server_address

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join()

    def serve_forever(self) -> None:
        self._server.serve_forever()


def serve(addr: str, artifact_paths, embedding_path=None) -> PredictionServer:
    """Load artifacts, bind the address ('host:port'), and return the server unstarted."""
    host, _, port = addr.partition(":")
    registry = Registry()
    for path in artifact_paths:
        registry.add_path(path, embedding_path=embedding_path)
    return PredictionServer(registry, host=host or "127.0.0.1", port=int(port or 0))
