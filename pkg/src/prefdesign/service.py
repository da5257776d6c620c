"""HTTP wire API for elicitation sessions.

Endpoints (JSON request/response):

* ``POST /sessions`` with ``{"alphabet": {...}, "epsilon": 1e-6, "budget": null}``
  creates a session and returns ``{"id", "pending_query", "estimated_total"}``.
* ``GET /sessions/{id}`` returns the full session view.
* ``POST /sessions/{id}/answer`` with ``{"verdict": "strictly-greater"}``
  advances the pipeline and returns the updated view (next query, result,
  or inconsistency witness).
* ``GET /sessions/{id}/result`` returns the reward table or 409 while the
  session is still running.

Lotteries travel in the core JSON schema plus a rendering block with
percentage odds (exact when the denominator divides 100).
"""

from __future__ import annotations

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .oracles import PreferenceOutcome
from .serialize import alphabet_from_obj
from .session import (
    ANSWER_VERDICTS,
    QueryBudgetExceededError,
    SessionError,
    SessionStore,
)

__all__ = ["create_app"]


def create_app(store: SessionStore) -> FastAPI:
    app = FastAPI(title="prefdesign elicitation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/health")
    def health():
        return {"ok": True}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        try:
            alphabet = alphabet_from_obj(payload["alphabet"])
        except (KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad alphabet: {exc}")
        epsilon = float(payload.get("epsilon", 1e-6))
        budget = payload.get("budget")
        try:
            session = store.create(alphabet, epsilon, budget)
        except QueryBudgetExceededError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except SessionError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "id": session.id,
            "pending_query": session.pending_query_view(),
            "estimated_total": session.estimated_total_queries(),
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return store.load(session_id).view()
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.post("/sessions/{session_id}/answer")
    def submit_answer(session_id: str, payload: dict = Body(...)):
        raw = payload.get("verdict")
        try:
            verdict = PreferenceOutcome(raw)
        except ValueError:
            raise HTTPException(
                status_code=400,
                detail=f"verdict must be one of {[v.value for v in ANSWER_VERDICTS]}",
            )
        if verdict not in ANSWER_VERDICTS:
            raise HTTPException(
                status_code=400,
                detail=f"verdict must be one of {[v.value for v in ANSWER_VERDICTS]}",
            )
        try:
            session = store.submit_answer(session_id, verdict)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        except QueryBudgetExceededError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return session.view()

    @app.get("/sessions/{session_id}/result")
    def get_result(session_id: str):
        try:
            session = store.load(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        if session.status == "inconsistent":
            return {"status": session.status, "inconsistency": session.inconsistency}
        if session.status != "complete":
            raise HTTPException(
                status_code=409, detail=f"session status is {session.status}, not complete"
            )
        view = session.result_view()
        view["status"] = "complete"
        return view

    return app
