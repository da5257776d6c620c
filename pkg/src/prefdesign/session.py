"""Interactive elicitation sessions: a human designer as the preference oracle.

A session is fully determined by (alphabet, epsilon, ordered answer list):
every state transition re-runs the design pipeline against a replay oracle
that raises on the first unanswered comparison, so crash recovery, disk
resumption, and determinism all fall out of one code path.  Answers that
contradict the earlier log (transitivity cycles, or verdicts the pipeline
cannot absorb) are recorded but rejected, the session turns inconsistent
with the witness, and the same query is offered again.

Persistence is one append-only JSONL file per session; the result is
cached alongside.  Timestamps live only in the log, never in results, so
replayed results are byte-identical.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .axioms import find_preference_cycle
from .design import DesignAbortError, DesignDiagnostics, DesignError, design_reward
from .histories import Alphabet
from .lotteries import Lottery
from .oracles import PreferenceOracle, PreferenceOutcome, RewardSpec, reward_spec_to_obj
from .serialize import (
    alphabet_from_obj,
    alphabet_to_obj,
    canonical_json,
    lottery_key,
    lottery_to_obj,
)

__all__ = [
    "Session",
    "SessionStore",
    "SessionError",
    "QueryBudgetExceededError",
    "render_lottery",
    "ANSWER_VERDICTS",
]

ANSWER_VERDICTS = (
    PreferenceOutcome.STRICTLY_LESS,
    PreferenceOutcome.INDIFFERENT,
    PreferenceOutcome.STRICTLY_GREATER,
)


class SessionError(Exception):
    pass


class QueryBudgetExceededError(SessionError):
    pass


class _PendingQuery(Exception):
    """Internal control flow: the pipeline needs an answer it does not have."""

    def __init__(self, index: int, left: Lottery, right: Lottery):
        super().__init__(f"query #{index} pending")
        self.index = index
        self.left = left
        self.right = right


class _ReplayOracle(PreferenceOracle):
    """Feeds recorded verdicts to the pipeline; raises when they run out."""

    def __init__(self, alphabet: Alphabet, answers: List[PreferenceOutcome],
                 budget: Optional[int]):
        super().__init__(alphabet)
        self.answers = answers
        self.budget = budget
        self.queries: List[Tuple[Lottery, Lottery]] = []

    def _compare(self, a: Lottery, b: Lottery) -> PreferenceOutcome:
        index = len(self.queries)
        self.queries.append((a, b))
        if self.budget is not None and index >= self.budget:
            raise QueryBudgetExceededError(
                f"session would need more than {self.budget} comparisons"
            )
        if index < len(self.answers):
            return self.answers[index]
        raise _PendingQuery(index, a, b)


@dataclass
class AnswerRecord:
    verdict: PreferenceOutcome
    timestamp: str
    rejected: bool = False
    rejection_reason: Optional[str] = None


@dataclass
class Session:
    id: str
    alphabet: Alphabet
    epsilon: float
    budget: Optional[int]
    records: List[AnswerRecord] = field(default_factory=list)
    status: str = "awaiting-answer"  # awaiting-answer | computing | complete | inconsistent
    pending: Optional[Tuple[int, Lottery, Lottery]] = None
    result_spec: Optional[RewardSpec] = None
    result_diagnostics: Optional[DesignDiagnostics] = None
    inconsistency: Optional[dict] = None

    def accepted_answers(self) -> List[PreferenceOutcome]:
        return [r.verdict for r in self.records if not r.rejected]

    # -- state machine -------------------------------------------------

    def advance(self) -> None:
        """Re-run the pipeline against the accepted answers (deterministic)."""
        self.status = "computing"
        oracle = _ReplayOracle(self.alphabet, self.accepted_answers(), self.budget)
        try:
            spec, diagnostics = design_reward(oracle, self.alphabet, self.epsilon)
        except _PendingQuery as query:
            self.pending = (query.index, query.left, query.right)
            self.status = "awaiting-answer"
            return
        except DesignAbortError as exc:
            self.pending = None
            self.status = "inconsistent"
            self.inconsistency = {
                "kind": "discount-consistency",
                "message": str(exc),
                "witness": exc.witness,
            }
            return
        except DesignError as exc:
            self.pending = None
            self.status = "inconsistent"
            self.inconsistency = {"kind": "ordering", "message": str(exc)}
            return
        self.pending = None
        self.status = "complete"
        self.result_spec = spec
        self.result_diagnostics = diagnostics

    def submit(self, verdict: PreferenceOutcome, timestamp: Optional[str] = None) -> None:
        if self.status == "complete":
            raise SessionError("session already complete; no answers expected")
        if self.status not in ("awaiting-answer", "inconsistent"):
            raise SessionError(f"session not awaiting an answer (status {self.status})")
        if verdict not in ANSWER_VERDICTS:
            raise SessionError(f"verdict must be one of {[v.value for v in ANSWER_VERDICTS]}")
        if self.pending is None:
            raise SessionError("no pending query")
        stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat()
        cycle = self._cycle_with(verdict)
        if cycle is not None:
            self.records.append(
                AnswerRecord(verdict, stamp, rejected=True, rejection_reason="transitivity-cycle")
            )
            self.status = "inconsistent"
            self.inconsistency = {
                "kind": "transitivity-cycle",
                "message": "this answer closes a preference cycle; the query is offered again",
                "witness": cycle,
            }
            return
        self.records.append(AnswerRecord(verdict, stamp))
        self.inconsistency = None
        self.advance()

    def _cycle_witness_for_last_rejected(self) -> Optional[List[dict]]:
        last = self.records[-1]
        if not last.rejected:
            return None
        return self._cycle_with(last.verdict)

    def _cycle_with(self, verdict: PreferenceOutcome) -> Optional[List[dict]]:
        """Cycle check over the answered comparisons plus the tentative one."""
        answers = self.accepted_answers() + [verdict]
        oracle = _ReplayOracle(self.alphabet, answers, None)
        try:
            design_reward(oracle, self.alphabet, self.epsilon)
        except (_PendingQuery, DesignError):
            pass
        records = []
        for idx, (left, right) in enumerate(oracle.queries[: len(answers)]):
            payload = {
                "query_index": idx,
                "left": lottery_to_obj(left),
                "right": lottery_to_obj(right),
                "verdict": answers[idx].value,
            }
            records.append((lottery_key(left), lottery_key(right), answers[idx], payload))
        return find_preference_cycle(records)

    # -- views -----------------------------------------------------------

    def estimated_total_queries(self) -> int:
        n = 2 * len(self.alphabet.transitions) + 1
        per_probe = math.ceil(math.log2(1 / self.epsilon)) + 3
        return n * max(1, math.ceil(math.log2(n))) + (n - 2) * per_probe + 4 * len(
            self.alphabet.transitions
        )

    def pending_query_view(self) -> Optional[dict]:
        if self.pending is None:
            return None
        index, left, right = self.pending
        return {
            "index": index,
            "left": render_lottery(left),
            "right": render_lottery(right),
        }

    def result_view(self) -> Optional[dict]:
        if self.result_spec is None:
            return None
        return {
            "reward_spec": reward_spec_to_obj(self.result_spec),
            "diagnostics": self.result_diagnostics.to_obj(),
        }

    def result_bytes(self) -> bytes:
        view = self.result_view()
        if view is None:
            raise SessionError("session has no result yet")
        return canonical_json(view).encode()

    def view(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "alphabet": alphabet_to_obj(self.alphabet),
            "epsilon": self.epsilon,
            "budget": self.budget,
            "answered": sum(1 for r in self.records if not r.rejected),
            "rejected": sum(1 for r in self.records if r.rejected),
            "estimated_total": self.estimated_total_queries(),
            "pending_query": self.pending_query_view(),
            "inconsistency": self.inconsistency,
            "result": self.result_view(),
        }


def render_lottery(lottery: Lottery) -> dict:
    """Wire payload: exact schema plus a human-readable gamble rendering."""
    outcomes = []
    for history, weight in lottery.items():
        num, den = weight.numerator, weight.denominator
        if (100 * num) % den == 0:
            percent = f"{100 * num // den}%"
            exact = True
        else:
            percent = f"~{100 * num / den:.1f}%"
            exact = False
        outcomes.append(
            {
                "history": history.label,
                "weight": str(weight),
                "percent": percent,
                "percent_exact": exact,
            }
        )
    return {"lottery": lottery_to_obj(lottery), "rendering": {"outcomes": outcomes}}


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


class SessionStore:
    """One append-only JSONL log per session under ``data_dir``."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._live: Dict[str, Session] = {}

    def _log_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def _result_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.result.json"

    def create(
        self,
        alphabet: Alphabet,
        epsilon: float = 1e-6,
        budget: Optional[int] = None,
        session_id: Optional[str] = None,
    ) -> Session:
        if not (0 < epsilon <= 1):
            raise SessionError("epsilon must lie in (0, 1]")
        if budget is not None and budget <= 0:
            raise QueryBudgetExceededError("query budget is already exhausted at 0")
        session = Session(
            id=session_id or uuid.uuid4().hex,
            alphabet=alphabet,
            epsilon=epsilon,
            budget=budget,
        )
        if self._log_path(session.id).exists():
            raise SessionError(f"session {session.id} already exists")
        header = {
            "type": "header",
            "id": session.id,
            "alphabet": alphabet_to_obj(alphabet),
            "epsilon": epsilon,
            "budget": budget,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
        with self._log_path(session.id).open("w") as fh:
            fh.write(canonical_json(header) + "\n")
        session.advance()
        self._live[session.id] = session
        self._maybe_cache_result(session)
        return session

    def load(self, session_id: str) -> Session:
        if session_id in self._live:
            return self._live[session_id]
        path = self._log_path(session_id)
        if not path.exists():
            raise KeyError(f"unknown session {session_id}")
        session: Optional[Session] = None
        with path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if obj["type"] == "header":
                    session = Session(
                        id=obj["id"],
                        alphabet=alphabet_from_obj(obj["alphabet"]),
                        epsilon=float(obj["epsilon"]),
                        budget=obj.get("budget"),
                    )
                elif obj["type"] == "answer":
                    if session is None:
                        raise SessionError(f"corrupt session log {path}: answer before header")
                    session.records.append(
                        AnswerRecord(
                            verdict=PreferenceOutcome(obj["verdict"]),
                            timestamp=obj["timestamp"],
                            rejected=bool(obj.get("rejected", False)),
                            rejection_reason=obj.get("rejection_reason"),
                        )
                    )
        if session is None:
            raise SessionError(f"corrupt session log {path}: no header")
        session.advance()
        if session.records and session.records[-1].rejected:
            # a rejected final answer leaves the session flagged, same query pending
            session.status = "inconsistent"
            session.inconsistency = {
                "kind": session.records[-1].rejection_reason or "rejected-answer",
                "message": "the last logged answer was rejected; the query is offered again",
                "witness": session._cycle_witness_for_last_rejected(),
            }
        self._live[session_id] = session
        return session

    def submit_answer(self, session_id: str, verdict: PreferenceOutcome) -> Session:
        session = self.load(session_id)
        session.submit(verdict)
        record = session.records[-1]
        entry = {
            "type": "answer",
            "verdict": record.verdict.value,
            "timestamp": record.timestamp,
            "rejected": record.rejected,
        }
        if record.rejection_reason:
            entry["rejection_reason"] = record.rejection_reason
        with self._log_path(session_id).open("a") as fh:
            fh.write(canonical_json(entry) + "\n")
        self._maybe_cache_result(session)
        return session

    def _maybe_cache_result(self, session: Session) -> None:
        if session.status == "complete":
            self._result_path(session.id).write_bytes(session.result_bytes())

    def list_sessions(self) -> List[str]:
        return sorted(p.stem for p in self.data_dir.glob("*.jsonl"))
