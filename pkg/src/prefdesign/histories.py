"""Transitions, histories, and finite alphabets.

A transition is one observation-action symbol pair; designer-side
alphabets may omit actions entirely, in which case a transition is a bare
observation.  Histories are finite transition sequences with a unique
empty history.  Equality is structural over symbol ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Tuple

__all__ = ["Transition", "History", "Alphabet", "EMPTY_HISTORY", "AlphabetMismatchError"]


class AlphabetMismatchError(ValueError):
    """A symbol or transition does not belong to the declared alphabet."""


@dataclass(frozen=True)
class Transition:
    """One observation-action pair; ``action`` is None for designer observations."""

    observation: str
    action: Optional[str] = None

    @property
    def label(self) -> str:
        if self.action is None:
            return self.observation
        return f"{self.observation}·{self.action}"

    def __repr__(self) -> str:
        return f"Transition({self.label})"

    def sort_key(self) -> Tuple[str, str]:
        return (self.observation, self.action or "")


@dataclass(frozen=True)
class History:
    """An ordered finite sequence of transitions; length 0 is the empty history."""

    transitions: Tuple[Transition, ...] = ()

    def __post_init__(self):
        if not isinstance(self.transitions, tuple):
            object.__setattr__(self, "transitions", tuple(self.transitions))

    def __len__(self) -> int:
        return len(self.transitions)

    def __iter__(self) -> Iterator[Transition]:
        return iter(self.transitions)

    def __bool__(self) -> bool:
        return bool(self.transitions)

    def prepend(self, t: Transition) -> "History":
        """The history with ``t`` prepended."""
        return History((t,) + self.transitions)

    def concat(self, other: "History") -> "History":
        return History(self.transitions + other.transitions)

    def has_prefix(self, prefix: "History") -> bool:
        n = len(prefix)
        return self.transitions[:n] == prefix.transitions

    def suffix_after(self, prefix: "History") -> "History":
        if not self.has_prefix(prefix):
            raise ValueError(f"{self} does not start with {prefix}")
        return History(self.transitions[len(prefix):])

    def sort_key(self) -> Tuple:
        return (len(self.transitions), tuple(t.sort_key() for t in self.transitions))

    @property
    def label(self) -> str:
        if not self.transitions:
            return "ε"
        return " ".join(t.label for t in self.transitions)

    def __repr__(self) -> str:
        return f"History({self.label})"

    @staticmethod
    def of(*transitions: Transition) -> "History":
        return History(tuple(transitions))


EMPTY_HISTORY = History(())


class Alphabet:
    """A declared finite set of observation and action symbols.

    With ``actions=None`` the alphabet is designer-style: transitions are
    bare observations.  Membership checks are how "alphabet mismatch"
    errors surface throughout the toolkit.
    """

    def __init__(self, observations: Sequence[str], actions: Optional[Sequence[str]] = None):
        if not observations:
            raise ValueError("alphabet needs at least one observation symbol")
        if len(set(observations)) != len(observations):
            raise ValueError("duplicate observation symbols")
        if actions is not None:
            if not actions:
                raise ValueError("action set may be None but not empty")
            if len(set(actions)) != len(actions):
                raise ValueError("duplicate action symbols")
        self.observations: Tuple[str, ...] = tuple(observations)
        self.actions: Optional[Tuple[str, ...]] = tuple(actions) if actions is not None else None

    @property
    def transitions(self) -> Tuple[Transition, ...]:
        if self.actions is None:
            return tuple(Transition(o) for o in self.observations)
        return tuple(
            Transition(o, a) for o in self.observations for a in self.actions
        )

    def __len__(self) -> int:
        return len(self.transitions)

    def __contains__(self, t: Transition) -> bool:
        if t.observation not in self.observations:
            return False
        if self.actions is None:
            return t.action is None
        return t.action in self.actions

    def __eq__(self, other) -> bool:
        if not isinstance(other, Alphabet):
            return NotImplemented
        return self.observations == other.observations and self.actions == other.actions

    def __repr__(self) -> str:
        return f"Alphabet(observations={self.observations}, actions={self.actions})"

    def transition(self, observation: str, action: Optional[str] = None) -> Transition:
        t = Transition(observation, action)
        if t not in self:
            raise AlphabetMismatchError(f"{t} not in {self}")
        return t

    def validate_history(self, h: History) -> History:
        for t in h:
            if t not in self:
                raise AlphabetMismatchError(f"{t} of {h} not in {self}")
        return h

    def histories_up_to(self, max_len: int) -> Tuple[History, ...]:
        """All histories of length <= max_len, shortest first, in symbol order."""
        result = [EMPTY_HISTORY]
        layer: Iterable[History] = [EMPTY_HISTORY]
        for _ in range(max_len):
            layer = [History(h.transitions + (t,)) for h in layer for t in self.transitions]
            result.extend(layer)
        return tuple(result)
