"""Finite-support lotteries over histories with exact rational weights.

All weights are strictly positive and sum exactly to one; support is
deduplicated under structural history equality.  Values are immutable and
hashable, so lotteries can key tables and be shared across threads.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Optional, Tuple

from .histories import Alphabet, AlphabetMismatchError, History, Transition
from .rationals import Rational

__all__ = ["Lottery", "mix", "prepend", "prepend_history", "redirect"]

_ZERO = Rational(0)
_ONE = Rational(1)


class Lottery:
    """A finite-support probability distribution over histories."""

    __slots__ = ("_entries",)

    _entries: Tuple[Tuple[History, Rational], ...]

    def __init__(self, weights: Mapping[History, Rational] | Iterable[Tuple[History, Rational]]):
        if isinstance(weights, Mapping):
            items = weights.items()
        else:
            items = list(weights)
        acc: Dict[History, Rational] = {}
        for h, w in items:
            if not isinstance(h, History):
                raise TypeError(f"lottery support must hold History, got {type(h)}")
            if not isinstance(w, Rational):
                raise TypeError(f"weights must be Rational, got {type(w)}")
            acc[h] = acc.get(h, _ZERO) + w
        entries = [(h, w) for h, w in acc.items() if w != _ZERO]
        for h, w in entries:
            if w < _ZERO:
                raise ValueError(f"negative weight {w} on {h}")
        total = _ZERO
        for _, w in entries:
            total = total + w
        if total != _ONE:
            raise ValueError(f"weights sum to {total}, not 1")
        entries.sort(key=lambda e: e[0].sort_key())
        object.__setattr__(self, "_entries", tuple(entries))

    def __setattr__(self, name, value):
        raise AttributeError("Lottery is immutable")

    @classmethod
    def dirac(cls, h: History) -> "Lottery":
        return cls({h: _ONE})

    # -- views ----------------------------------------------------------

    @property
    def support(self) -> Tuple[History, ...]:
        return tuple(h for h, _ in self._entries)

    def items(self) -> Tuple[Tuple[History, Rational], ...]:
        return self._entries

    def weight(self, h: History) -> Rational:
        for hh, w in self._entries:
            if hh == h:
                return w
        return _ZERO

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Lottery):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(self._entries)

    @property
    def label(self) -> str:
        return " + ".join(f"{w}·[{h.label}]" for h, w in self._entries)

    def __repr__(self) -> str:
        return f"Lottery({self.label})"

    def total_weight(self) -> Rational:
        total = _ZERO
        for _, w in self._entries:
            total = total + w
        return total


def mix(p: Rational, a: Lottery, b: Lottery) -> Lottery:
    """The lottery sampling from ``a`` with probability ``p``, else ``b``."""
    if not isinstance(p, Rational):
        raise TypeError("mixing weight must be a Rational")
    if p < _ZERO or p > _ONE:
        raise ValueError(f"mixing weight {p} outside [0, 1]")
    if p == _ONE:
        return a
    if p == _ZERO:
        return b
    acc: Dict[History, Rational] = {}
    for h, w in a.items():
        acc[h] = acc.get(h, _ZERO) + p * w
    q = _ONE - p
    for h, w in b.items():
        acc[h] = acc.get(h, _ZERO) + q * w
    return Lottery(acc)


def prepend(t: Transition, a: Lottery, alphabet: Optional[Alphabet] = None) -> Lottery:
    """Prepend transition ``t`` to every history in the support of ``a``.

    When an alphabet is supplied, ``t`` and the support are checked
    against it; this is where alphabet mismatches fail.
    """
    if alphabet is not None:
        if t not in alphabet:
            raise AlphabetMismatchError(f"{t} not in {alphabet}")
        for h in a.support:
            alphabet.validate_history(h)
    return Lottery({h.prepend(t): w for h, w in a.items()})


def prepend_history(prefix: History, a: Lottery) -> Lottery:
    """Prepend a whole history (possibly empty) to every supported history."""
    if not prefix:
        return a
    return Lottery({prefix.concat(h): w for h, w in a.items()})


def redirect(c: Lottery, h: History, b: Lottery) -> Lottery:
    """Shift all mass that ``c`` puts on histories prefixed by ``h`` onto ``h``-then-``b``.

    The removed mass m reappears as m times the prefixed copy of ``b``;
    when no supported history has the prefix, ``c`` is returned unchanged.
    """
    mass = _ZERO
    kept: Dict[History, Rational] = {}
    for hist, w in c.items():
        if hist.has_prefix(h):
            mass = mass + w
        else:
            kept[hist] = kept.get(hist, _ZERO) + w
    if mass == _ZERO:
        return c
    for hist, w in b.items():
        target = h.concat(hist)
        kept[target] = kept.get(target, _ZERO) + mass * w
    return Lottery(kept)
