"""HTTP API over the orchestrator, versioned under /api/v1.

The dashboard (and any other client) talks only to these endpoints; verdict
computation never happens client-side. Auth is a single static bearer token
taken from the environment; the health endpoint is exempt. Mutation
endpoints accept an idempotency key so retries cannot double-apply.
"""

from __future__ import annotations

import logging
import os
import threading
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from pydantic import BaseModel, Field

from .engine import export_matrix_csv, export_matrix_json
from .flows import ApprovalStateError, FlowError
from .logs import LogError
from .orchestrator import (
    Orchestrator,
    OrchestratorError,
    RunIntegrityError,
    RunRecord,
    StateTransitionError,
    UnknownRunError,
)
from .repository import RepositoryError

logger = logging.getLogger(__name__)

API_PREFIX = "/api/v1"


class CreateRunBody(BaseModel):
    tc_id: str
    log_content: str = Field(description="canonical log JSON content")
    run_id: Optional[str] = None
    idempotency_key: Optional[str] = None


class ApprovalBody(BaseModel):
    decision: str = Field(description="approve | reject")
    operator: str
    edited_steps: Optional[list[str]] = None
    idempotency_key: Optional[str] = None


def _run_summary(record: RunRecord) -> dict:
    return {
        "run_id": record.run_id,
        "tc_id": record.tc_id,
        "state": record.state.value,
        "log_origin": record.log_origin,
        "val_verdict": record.val_verdict.to_dict() if record.val_verdict else None,
        "debug_verdict": record.debug_verdict.to_dict() if record.debug_verdict else None,
        "has_matrix": record.has_matrix,
        "state_history": record.state_history,
        "abort_cause": record.abort_cause,
    }


def create_app(orchestrator: Orchestrator, token: Optional[str] = None) -> FastAPI:
    """Build the API app; token=None falls back to the configured env var."""
    if token is None:
        token = os.environ.get(orchestrator.config.api_token_env) or None

    app = FastAPI(title="orantest gateway", version="1.0")
    create_keys: dict[str, str] = {}
    create_lock = threading.Lock()

    def require_auth(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    @app.exception_handler(UnknownRunError)
    async def _unknown_run(request, exc):  # noqa: ANN001
        return _error_response(404, str(exc))

    @app.exception_handler(StateTransitionError)
    async def _bad_state(request, exc):  # noqa: ANN001
        return _error_response(409, str(exc))

    @app.exception_handler(ApprovalStateError)
    async def _bad_approval(request, exc):  # noqa: ANN001
        return _error_response(409, str(exc))

    @app.exception_handler(RunIntegrityError)
    async def _integrity(request, exc):  # noqa: ANN001
        return _error_response(500, str(exc))

    @app.exception_handler(RepositoryError)
    async def _repo(request, exc):  # noqa: ANN001
        return _error_response(404, str(exc))

    @app.exception_handler(LogError)
    async def _log_error(request, exc):  # noqa: ANN001
        return _error_response(400, str(exc))

    @app.exception_handler(FlowError)
    async def _flow_error(request, exc):  # noqa: ANN001
        return _error_response(400, str(exc))

    @app.exception_handler(OrchestratorError)
    async def _orc(request, exc):  # noqa: ANN001
        return _error_response(400, str(exc))

    @app.get(f"{API_PREFIX}/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get(f"{API_PREFIX}/testcases", dependencies=[Depends(require_auth)])
    def list_testcases() -> list[dict]:
        return [case.to_dict() for case in orchestrator.repository]

    @app.get(f"{API_PREFIX}/runs", dependencies=[Depends(require_auth)])
    def list_runs() -> list[str]:
        return orchestrator.list_runs()

    @app.post(f"{API_PREFIX}/runs", dependencies=[Depends(require_auth)], status_code=201)
    def create_run(body: CreateRunBody) -> dict:
        if body.idempotency_key:
            with create_lock:
                existing = create_keys.get(body.idempotency_key)
            if existing is not None:
                return _run_summary(orchestrator.resume_run(existing))
        record = orchestrator.create_run(
            body.tc_id, body.log_content.encode("utf-8"), run_id=body.run_id
        )
        if body.idempotency_key:
            with create_lock:
                create_keys[body.idempotency_key] = record.run_id
        return _run_summary(record)

    @app.get(f"{API_PREFIX}/runs/{{run_id}}", dependencies=[Depends(require_auth)])
    def get_run(run_id: str) -> dict:
        return _run_summary(orchestrator.resume_run(run_id))

    @app.get(f"{API_PREFIX}/runs/{{run_id}}/approval", dependencies=[Depends(require_auth)])
    def get_approval(run_id: str) -> dict:
        return orchestrator.approval_payload(run_id)

    @app.post(f"{API_PREFIX}/runs/{{run_id}}/approval", dependencies=[Depends(require_auth)])
    def post_approval(run_id: str, body: ApprovalBody) -> dict:
        if body.decision not in ("approve", "reject"):
            raise HTTPException(
                status_code=400, detail="decision must be 'approve' or 'reject'"
            )
        record = orchestrator.apply_approval(
            run_id,
            approve=body.decision == "approve",
            operator=body.operator,
            edited_steps=body.edited_steps,
            idempotency_key=body.idempotency_key,
        )
        return _run_summary(record)

    @app.get(f"{API_PREFIX}/runs/{{run_id}}/verdicts", dependencies=[Depends(require_auth)])
    def get_verdicts(run_id: str) -> dict:
        record = orchestrator.resume_run(run_id)
        return {
            "validation": record.val_verdict.to_dict() if record.val_verdict else None,
            "debug": record.debug_verdict.to_dict() if record.debug_verdict else None,
        }

    @app.get(f"{API_PREFIX}/runs/{{run_id}}/matrix", dependencies=[Depends(require_auth)])
    def get_matrix(run_id: str, format: str = "json"):
        matrix = orchestrator.load_matrix(run_id)
        if format == "csv":
            return Response(content=export_matrix_csv(matrix), media_type="text/csv")
        if format != "json":
            raise HTTPException(status_code=400, detail="format must be 'json' or 'csv'")
        return export_matrix_json(matrix)

    @app.get(f"{API_PREFIX}/runs/{{run_id}}/report", dependencies=[Depends(require_auth)])
    def get_report(run_id: str) -> dict:
        return orchestrator.get_report(run_id)

    return app


def _error_response(status: int, detail: str):
    from fastapi.responses import JSONResponse

    return JSONResponse(status_code=status, content={"detail": detail})
