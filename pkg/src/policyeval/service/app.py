"""HTTP service for running live blind evaluation sessions.

One session maps to one append-only log file under ``sessions_dir``;
every request replays the log, so killing and restarting the service
between any two events yields identical behavior. Writes to a given
session are serialized with a per-session lock; responses for a blinded
session never contain a policy id.
"""
from __future__ import annotations

import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..model import TaskSpec, aggregate_rubric, validate_task_spec
from ..report import build_report, render
from ..stats import compare
from ..store import EventLog, SessionState, StoreError, create_plan
from . import schemas


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str):
        self.status = status
        self.code = code
        self.detail = detail


def create_app(sessions_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    sessions_dir = Path(sessions_dir)
    sessions_dir.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="policyeval session service")
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def lock_for(session_id: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(session_id, threading.Lock())

    def log_for(session_id: str) -> EventLog:
        log = EventLog(sessions_dir / f"{session_id}.log")
        if not log.exists():
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return log

    def progress(state: SessionState) -> schemas.ProgressModel:
        return schemas.ProgressModel(**state.progress_view())

    @app.exception_handler(ApiError)
    async def on_api_error(_: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.code, "detail": exc.detail}
        )

    @app.exception_handler(StoreError)
    async def on_store_error(_: Request, exc: StoreError):
        return JSONResponse(
            status_code=409, content={"error": "invalid_event", "detail": str(exc)}
        )

    @app.post("/sessions", response_model=schemas.CreateSessionResponse)
    def create_session(req: schemas.CreateSessionRequest):
        task = TaskSpec.from_dict(req.task)
        violations = validate_task_spec(task)
        if violations:
            raise ApiError(422, "invalid_task", "; ".join(violations))
        plan = create_plan(
            policies=req.policies,
            ics=[ic.id for ic in task.initial_conditions],
            repetitions=req.repetitions,
            seed=req.seed,
        )
        session_id = uuid.uuid4().hex[:12]
        log = EventLog(sessions_dir / f"{session_id}.log")
        with lock_for(session_id):
            log.create_session(task, plan)
        return schemas.CreateSessionResponse(
            session_id=session_id, total_rollouts=len(plan.entries)
        )

    @app.get("/sessions/{session_id}/next", response_model=schemas.NextResponse)
    def next_assignment(session_id: str):
        log = log_for(session_id)
        with lock_for(session_id):
            state = log.replay()
            idx = state.next_index()
            if idx is None or not state.blinded:
                return schemas.NextResponse(complete=True, progress=progress(state))
            if idx not in state.started:
                log.append("RolloutStarted", {"rollout_index": idx})
                state = log.replay()
            view = state.assignment_view(idx)
        return schemas.NextResponse(
            complete=False,
            assignment=schemas.AssignmentViewModel(**view),
            progress=progress(state),
        )

    @app.post(
        "/sessions/{session_id}/rollouts/{rollout_index}/rubric",
        response_model=schemas.SubmitResponse,
    )
    def submit_rubric(session_id: str, rollout_index: int, body: schemas.RubricSubmission):
        log = log_for(session_id)
        with lock_for(session_id):
            state = log.replay()
            if not state.blinded:
                raise ApiError(409, "session_unblinded", "session is already finalized")
            if not 0 <= rollout_index < state.total:
                raise ApiError(404, "unknown_rollout", f"no rollout {rollout_index}")
            if rollout_index != state.next_index() and not body.amend:
                raise ApiError(
                    409,
                    "not_current_rollout",
                    f"rollout {rollout_index} is not the current assignment; "
                    "set amend=true to supersede an earlier answer",
                )
            missing = sorted(set(state.task.question_ids()) - set(body.answers))
            if missing:
                raise ApiError(
                    422, "missing_questions", "missing answers for: " + ", ".join(missing)
                )
            log.append(
                "RubricRecorded",
                {
                    "rollout_index": rollout_index,
                    "answers": body.answers,
                    "failure_note": body.failure_note,
                },
            )
            state = log.replay()
        return schemas.SubmitResponse(ok=True, progress=progress(state))

    @app.post("/sessions/{session_id}/finalize", response_model=schemas.FinalizeResponse)
    def finalize_session(session_id: str, body: schemas.FinalizeRequest = schemas.FinalizeRequest()):
        log = log_for(session_id)
        with lock_for(session_id):
            state = log.replay()
            if not state.blinded:
                raise ApiError(409, "already_unblinded", "session is already finalized")
            if not state.is_complete() and not body.force:
                pending = ", ".join(str(i) for i in state.incomplete_indices())
                raise ApiError(
                    409, "session_incomplete", f"pending rollouts: {pending}; use force"
                )
            log.append("SessionUnblinded", {"forced": not state.is_complete()})
            state = log.replay()

        records = state.completed_records()
        table = aggregate_rubric(state.task, records, policies=state.plan.policies)
        overall = state.task.overall_question
        success_counts = {}
        for p in state.plan.policies:
            yes, no = table.cell(overall.id, p)
            success_counts[p] = {"successes": yes, "failures": no, "total": yes + no}
        comparisons = []
        for a, b in zip(state.plan.policies, state.plan.policies[1:]):
            ca, cb = success_counts[a], success_counts[b]
            if ca["total"] == 0 or cb["total"] == 0:
                continue
            res = compare((ca["successes"], ca["failures"]), (cb["successes"], cb["failures"]))
            comparisons.append(
                {
                    "first_policy": a,
                    "second_policy": b,
                    "prob_second_better": res.prob_second_better,
                    "diff_interval": list(res.diff_interval),
                    "level": res.level,
                    "excludes_zero": res.excludes_zero,
                    "n_samples": res.n_samples,
                    "seed": res.seed,
                }
            )
        rubric_counts = {
            q.id: {p: list(table.cell(q.id, p)) for p in state.plan.policies}
            for q in state.task.rubric
        }
        return schemas.FinalizeResponse(
            plan=state.plan.to_dict(),
            rubric_counts=rubric_counts,
            success_counts=success_counts,
            comparisons=comparisons,
            excluded_rollouts=sorted(state.incomplete_indices()),
        )

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str, format: str = "markdown"):
        if format not in ("markdown", "json"):
            raise ApiError(422, "unknown_format", f"unknown report format {format!r}")
        log = log_for(session_id)
        state = log.replay()
        if state.blinded:
            raise ApiError(409, "session_blinded", "finalize the session before reporting")
        report = build_report(state)
        body = render(report, format)
        media = "text/markdown" if format == "markdown" else "application/json"
        return Response(content=body, media_type=media)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
