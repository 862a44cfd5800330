"""HTTP API surface: auth, workflow endpoints, error mapping, idempotency."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from conftest import make_orchestrator
from orantest.gateway import create_app

TOKEN = "test-token"


@pytest.fixture()
def client(fixtures_dir, repository, corpus_index, tmp_path):
    orchestrator = make_orchestrator(
        fixtures_dir, repository, corpus_index, tmp_path / "runs"
    )
    app = create_app(orchestrator, token=TOKEN)
    return TestClient(app, headers={"Authorization": f"Bearer {TOKEN}"})


def fixture_log(fixtures_dir, name: str) -> str:
    return (fixtures_dir / "logs" / name).read_text(encoding="utf-8")


class TestAuth:
    def test_health_is_unauthenticated(self, client):
        response = TestClient(client.app).get("/api/v1/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_missing_token_is_401(self, client):
        response = TestClient(client.app).get("/api/v1/testcases")
        assert response.status_code == 401

    def test_wrong_token_is_401(self, client):
        response = TestClient(
            client.app, headers={"Authorization": "Bearer nope"}
        ).get("/api/v1/testcases")
        assert response.status_code == 401


class TestWorkflowEndpoints:
    def test_list_testcases(self, client):
        response = client.get("/api/v1/testcases")
        assert response.status_code == 200
        assert len(response.json()) == 24

    def test_full_run_round_trip(self, client, fixtures_dir):
        created = client.post("/api/v1/runs", json={
            "tc_id": "TC-07",
            "log_content": fixture_log(fixtures_dir, "tc-07.json"),
            "run_id": "r-api",
        })
        assert created.status_code == 201
        assert created.json()["state"] == "awaiting_approval"

        payload = client.get("/api/v1/runs/r-api/approval").json()
        assert len(payload["documents"]) == 5
        assert payload["flow"]["steps"]
        assert payload["documents"][0]["doc_id"] == "38401-fa0.md"

        decided = client.post("/api/v1/runs/r-api/approval", json={
            "decision": "approve", "operator": "alex",
        })
        assert decided.status_code == 200
        body = decided.json()
        assert body["state"] == "completed"
        assert body["val_verdict"]["kind"] == "fail"
        assert body["debug_verdict"]["kind"] == "partial_pass"

        verdicts = client.get("/api/v1/runs/r-api/verdicts").json()
        assert verdicts["validation"]["kind"] == "fail"

        matrix = client.get("/api/v1/runs/r-api/matrix").json()
        assert matrix["m"] == 7 and matrix["n"] == 16

        csv_resp = client.get("/api/v1/runs/r-api/matrix", params={"format": "csv"})
        assert csv_resp.headers["content-type"].startswith("text/csv")
        assert csv_resp.text.splitlines()[0].startswith("step,log_1")

        report = client.get("/api/v1/runs/r-api/report").json()
        assert report["run_id"] == "r-api"

    def test_reject_then_approve(self, client, fixtures_dir):
        client.post("/api/v1/runs", json={
            "tc_id": "TC-06",
            "log_content": fixture_log(fixtures_dir, "tc-06.json"),
            "run_id": "r-rej",
        })
        rejected = client.post("/api/v1/runs/r-rej/approval", json={
            "decision": "reject", "operator": "alex",
        })
        assert rejected.status_code == 200
        assert rejected.json()["state"] == "awaiting_approval"
        approved = client.post("/api/v1/runs/r-rej/approval", json={
            "decision": "approve", "operator": "alex",
        })
        assert approved.json()["state"] == "completed"

    def test_unknown_run_is_404(self, client):
        assert client.get("/api/v1/runs/ghost").status_code == 404
        assert client.get("/api/v1/runs/ghost/report").status_code == 404

    def test_approval_on_completed_run_is_409(self, client, fixtures_dir):
        client.post("/api/v1/runs", json={
            "tc_id": "TC-06",
            "log_content": fixture_log(fixtures_dir, "tc-06.json"),
            "run_id": "r-done",
        })
        client.post("/api/v1/runs/r-done/approval",
                    json={"decision": "approve", "operator": "alex"})
        again = client.post("/api/v1/runs/r-done/approval",
                            json={"decision": "approve", "operator": "alex"})
        assert again.status_code == 409

    def test_schema_violation_is_400_class(self, client):
        response = client.post("/api/v1/runs", json={"tc_id": "TC-06"})
        assert response.status_code == 422
        detail = response.json()["detail"]
        assert any("log_content" in str(item.get("loc")) for item in detail)

    def test_bad_decision_is_400(self, client, fixtures_dir):
        client.post("/api/v1/runs", json={
            "tc_id": "TC-06",
            "log_content": fixture_log(fixtures_dir, "tc-06.json"),
            "run_id": "r-maybe",
        })
        response = client.post("/api/v1/runs/r-maybe/approval", json={
            "decision": "maybe", "operator": "alex",
        })
        assert response.status_code == 400

    def test_matrix_absent_for_pass_run(self, client, fixtures_dir):
        client.post("/api/v1/runs", json={
            "tc_id": "TC-06",
            "log_content": fixture_log(fixtures_dir, "tc-06.json"),
            "run_id": "r-pass",
        })
        client.post("/api/v1/runs/r-pass/approval",
                    json={"decision": "approve", "operator": "alex"})
        assert client.get("/api/v1/runs/r-pass/matrix").status_code == 404


class TestIdempotency:
    def test_create_run_replay_returns_same_run(self, client, fixtures_dir):
        body = {
            "tc_id": "TC-06",
            "log_content": fixture_log(fixtures_dir, "tc-06.json"),
            "idempotency_key": "create-1",
        }
        first = client.post("/api/v1/runs", json=body).json()
        second = client.post("/api/v1/runs", json=body).json()
        assert first["run_id"] == second["run_id"]
        assert client.get("/api/v1/runs").json().count(first["run_id"]) == 1

    def test_approval_replay_is_idempotent(self, client, fixtures_dir):
        client.post("/api/v1/runs", json={
            "tc_id": "TC-06",
            "log_content": fixture_log(fixtures_dir, "tc-06.json"),
            "run_id": "r-ikey",
        })
        body = {"decision": "approve", "operator": "alex", "idempotency_key": "ap-1"}
        first = client.post("/api/v1/runs/r-ikey/approval", json=body)
        second = client.post("/api/v1/runs/r-ikey/approval", json=body)
        assert first.status_code == 200
        assert second.status_code == 200
        assert second.json()["state"] == "completed"
