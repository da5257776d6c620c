"""JSON schema for the core value types.

Schema (documented here, exercised by round-trip tests):

* Transition: ``[observation, action]`` with ``action: null`` for
  designer-side observations.
* History: array of transitions; the empty history is ``[]``.
* Lottery: ``{"weights": [[history, "num/den"], ...]}`` with entries in
  canonical support order.  Weights are exact rational strings, so a
  dump/load round trip is bit-exact.
* Alphabet: ``{"observations": [...], "actions": [...] | null}``.

``canonical_json`` fixes key order and separators so equal values always
serialize to identical bytes.
"""

from __future__ import annotations

import json
from typing import Any, List, Optional

from .histories import Alphabet, History, Transition
from .lotteries import Lottery
from .rationals import Rational

__all__ = [
    "canonical_json",
    "transition_to_obj",
    "transition_from_obj",
    "history_to_obj",
    "history_from_obj",
    "lottery_to_obj",
    "lottery_from_obj",
    "alphabet_to_obj",
    "alphabet_from_obj",
    "rational_to_str",
    "rational_from_str",
]


def canonical_json(obj: Any) -> str:
    """Deterministic JSON encoding (sorted keys, no whitespace)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def rational_to_str(r: Rational) -> str:
    return str(r)


def rational_from_str(text: str) -> Rational:
    return Rational.from_string(text)


def transition_to_obj(t: Transition) -> List[Optional[str]]:
    return [t.observation, t.action]


def transition_from_obj(obj: Any) -> Transition:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise ValueError(f"transition must be a [observation, action] pair, got {obj!r}")
    obs, act = obj
    if not isinstance(obs, str) or not (act is None or isinstance(act, str)):
        raise ValueError(f"bad transition symbols {obj!r}")
    return Transition(obs, act)


def history_to_obj(h: History) -> List[List[Optional[str]]]:
    return [transition_to_obj(t) for t in h]


def history_from_obj(obj: Any) -> History:
    if not isinstance(obj, list):
        raise ValueError(f"history must be an array of transitions, got {obj!r}")
    return History(tuple(transition_from_obj(t) for t in obj))


def lottery_to_obj(a: Lottery) -> dict:
    return {"weights": [[history_to_obj(h), str(w)] for h, w in a.items()]}


def lottery_from_obj(obj: Any) -> Lottery:
    if not isinstance(obj, dict) or "weights" not in obj:
        raise ValueError(f"lottery must be {{'weights': [...]}}, got {obj!r}")
    pairs = []
    for entry in obj["weights"]:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ValueError(f"bad lottery entry {entry!r}")
        hist, weight = entry
        pairs.append((history_from_obj(hist), Rational.from_string(weight)))
    return Lottery(pairs)


def alphabet_to_obj(alphabet: Alphabet) -> dict:
    return {
        "observations": list(alphabet.observations),
        "actions": list(alphabet.actions) if alphabet.actions is not None else None,
    }


def alphabet_from_obj(obj: Any) -> Alphabet:
    if not isinstance(obj, dict) or "observations" not in obj:
        raise ValueError(f"alphabet must carry 'observations', got {obj!r}")
    return Alphabet(obj["observations"], obj.get("actions"))


def lottery_key(a: Lottery) -> str:
    """Canonical string key for structural lottery identity."""
    return canonical_json(lottery_to_obj(a))
