import json
import time
import urllib.error
import urllib.request

import numpy as np
import pytest

from aljp import corpus
from aljp.artifact import save_artifact
from aljp.cli import train_artifact
from aljp.errors import InvalidInputError, NotFoundError
from aljp.service import PredictionServer, Registry, handle_predict, model_listing


@pytest.fixture(scope="module")
def small_cases():
    spec = corpus.default_synth_spec("custody", per_class=6)
    return corpus.generate_synthetic(spec, seed=13)


@pytest.fixture(scope="module")
def registry(small_cases, tmp_path_factory):
    root = tmp_path_factory.mktemp("artifacts")
    judgment = train_artifact(small_cases, "judgment", "logreg", "tfidf", seed=3)
    evidence = train_artifact(small_cases, "evidence", "logreg", "tfidf", seed=3)
    probability = train_artifact(
        small_cases, "probability", "lstm", "tfidf", seed=3,
        overrides={"epochs": 2, "maxlen": 32, "embed_dim": 8, "lstm_units": 8, "dense_units": 8},
    )
    reg = Registry()
    for name, artifact in [
        ("judgment-custody", judgment),
        ("evidence-custody", evidence),
        ("probability-custody", probability),
    ]:
        path = root / f"{name}.aljp"
        save_artifact(artifact, path)
        reg.add_path(path)
    return reg


PLEADING = "حضر الطرفان المحكمة وطلب وكيل المدعية التخيير بعد سماع الشهود"


class TestHandlePredict:
    def test_valid_pleading_four_probabilities(self, registry):
        response = handle_predict(
            {"model_id": "judgment-custody", "pleading": PLEADING}, registry
        )
        probs = [entry["probability"] for entry in response["probabilities"]]
        assert len(probs) == 4
        assert abs(sum(probs) - 1.0) < 1e-6
        assert response["predicted_class"] in [
            entry["name"] for entry in response["probabilities"]
        ]
        assert response["token_count"] > 0

    def test_unknown_model_id(self, registry):
        with pytest.raises(NotFoundError):
            handle_predict({"model_id": "nope", "pleading": PLEADING}, registry)

    def test_empty_pleading_invalid(self, registry):
        with pytest.raises(InvalidInputError):
            handle_predict({"model_id": "judgment-custody", "pleading": ""}, registry)

    def test_probability_task_needs_claim_and_answer(self, registry):
        with pytest.raises(InvalidInputError):
            handle_predict(
                {"model_id": "probability-custody", "pleading": PLEADING}, registry
            )
        response = handle_predict(
            {
                "model_id": "probability-custody",
                "claim": "ادعت المدعية التخيير",
                "answer": "انكر المدعى عليه الدعوى",
            },
            registry,
        )
        for entry in response["probabilities"]:
            assert 0.0 < entry["probability"] < 1.0

    def test_evidence_attachment(self, registry):
        response = handle_predict(
            {
                "model_id": "judgment-custody",
                "evidence_model_id": "evidence-custody",
                "pleading": PLEADING,
            },
            registry,
        )
        assert "evidence" in response
        assert len(response["evidence"]["probabilities"]) == 8

    def test_identical_requests_identical_responses(self, registry):
        request = {"model_id": "judgment-custody", "pleading": PLEADING}
        a = handle_predict(request, registry)
        b = handle_predict(request, registry)
        assert a == b

    def test_model_listing(self, registry):
        listing = model_listing(registry)
        ids = [entry["id"] for entry in listing]
        assert ids == sorted(ids)
        assert "judgment-custody" in ids
        judgment = next(e for e in listing if e["id"] == "judgment-custody")
        assert judgment["task"] == "judgment"
        assert len(judgment["classes"]) == 4


def _get(url: str):
    with urllib.request.urlopen(url, timeout=5) as response:
        return response.status, json.loads(response.read().decode("utf-8"))


def _post(url: str, body: bytes):
    request = urllib.request.Request(
        url, data=body, headers={"Content-Type": "application/json"}, method="POST"
    )
    try:
        with urllib.request.urlopen(request, timeout=5) as response:
            return response.status, json.loads(response.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read().decode("utf-8"))


@pytest.fixture(scope="module")
def server(registry):
    srv = PredictionServer(registry, host="127.0.0.1", port=0)
    srv.start()
    yield srv
    srv.stop()


@pytest.fixture(scope="module")
def base_url(server):
    host, port = server.address[0], server.address[1]
    return f"http://{host}:{port}"


class TestHttpService:
    def test_health(self, base_url):
        status, body = _get(f"{base_url}/health")
        assert status == 200
        assert body == {"status": "ok"}

    def test_models_endpoint(self, base_url):
        status, body = _get(f"{base_url}/models")
        assert status == 200
        assert {m["id"] for m in body["models"]} == {
            "judgment-custody",
            "evidence-custody",
            "probability-custody",
        }

    def test_predict_endpoint(self, base_url):
        body = json.dumps(
            {"model_id": "judgment-custody", "pleading": PLEADING}, ensure_ascii=False
        ).encode("utf-8")
        status, response = _post(f"{base_url}/predict", body)
        assert status == 200
        assert abs(sum(e["probability"] for e in response["probabilities"]) - 1.0) < 1e-6

    def test_unknown_model_structured_404(self, base_url):
        body = json.dumps({"model_id": "ghost", "pleading": PLEADING}).encode()
        status, response = _post(f"{base_url}/predict", body)
        assert status == 404
        assert response["error"]["code"] == "not_found"

    def test_invalid_input_structured_422(self, base_url):
        body = json.dumps({"model_id": "judgment-custody", "pleading": "12-05-2020"}).encode()
        status, response = _post(f"{base_url}/predict", body)
        assert status == 422
        assert response["error"]["code"] == "invalid_input"

    def test_bad_json_structured_400(self, base_url):
        status, response = _post(f"{base_url}/predict", b"{not json")
        assert status == 400
        assert response["error"]["code"] == "bad_request"

    def test_unknown_route_404(self, base_url):
        try:
            with urllib.request.urlopen(f"{base_url}/nope", timeout=5) as response:
                status = response.status
                body = json.loads(response.read().decode())
        except urllib.error.HTTPError as exc:
            status = exc.code
            body = json.loads(exc.read().decode())
        assert status == 404
        assert body["error"]["code"] == "not_found"

    def test_fuzzed_requests_never_crash(self, base_url):
        malformed = [
            b"",
            b"null",
            b"[]",
            b'"text"',
            b'{"model_id": 5}',
            b'{"model_id": "judgment-custody"}',
            b'{"model_id": "judgment-custody", "pleading": 7}',
            json.dumps({"model_id": "judgment-custody", "claim": "x"}).encode(),
            b'{"pleading": "x"}',
            "نص عربي فقط".encode("utf-8"),
        ]
        for body in malformed:
            status, response = _post(f"{base_url}/predict", body)
            assert status in (400, 404, 422), (body, status, response)
            assert "error" in response
            assert {"code", "message"} <= set(response["error"])

    def test_latency_under_200ms(self, base_url):
        body = json.dumps(
            {"model_id": "judgment-custody", "pleading": PLEADING}, ensure_ascii=False
        ).encode("utf-8")
        _post(f"{base_url}/predict", body)  # warm-up
        started = time.perf_counter()
        status, _ = _post(f"{base_url}/predict", body)
        elapsed = time.perf_counter() - started
        assert status == 200
        assert elapsed < 0.2, f"prediction took {elapsed:.3f}s"
