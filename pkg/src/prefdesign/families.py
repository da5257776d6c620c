"""Generated lottery families: the finite search spaces axiom checks run on.

A family enumerates every lottery whose support lies in a declared base
history set and whose weights sit on the 1/q grid.  Families larger than
a cap are thinned by seeded sampling, and the family records which mode
produced it so reports can say what was actually searched.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .histories import Alphabet, History
from .lotteries import Lottery
from .rationals import Rational

__all__ = ["LotteryFamily", "generate_family", "default_family", "default_p_grid"]


@dataclass(frozen=True)
class LotteryFamily:
    base_histories: Tuple[History, ...]
    q: int
    lotteries: Tuple[Lottery, ...]
    exhaustive: bool
    full_size: int

    @property
    def size(self) -> int:
        return len(self.lotteries)

    def describe(self) -> str:
        mode = "exhaustive" if self.exhaustive else f"seeded sample of {self.full_size}"
        return (
            f"{self.size} lotteries over {len(self.base_histories)} base histories, "
            f"weight grid 1/{self.q} ({mode})"
        )


def _compositions(total: int, cells: int) -> Iterable[Tuple[int, ...]]:
    """All nonnegative integer vectors of the given length summing to total."""
    if cells == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, cells - 1):
            yield (head,) + rest


def _composition_count(total: int, cells: int) -> int:
    from math import comb

    return comb(total + cells - 1, cells - 1)


def _lottery_from_counts(base: Sequence[History], counts: Sequence[int], q: int) -> Lottery:
    return Lottery({h: Rational(c, q) for h, c in zip(base, counts) if c})


def generate_family(
    base_histories: Sequence[History],
    q: int,
    max_size: Optional[int] = None,
    seed: int = 0,
) -> LotteryFamily:
    """Every lottery on the 1/q grid over the base, sampled down past max_size."""
    if q < 1:
        raise ValueError("weight grid denominator must be >= 1")
    base = list(dict.fromkeys(base_histories))
    if not base:
        raise ValueError("family needs at least one base history")
    full = _composition_count(q, len(base))
    if max_size is None or full <= max_size:
        lotteries = tuple(
            _lottery_from_counts(base, counts, q) for counts in _compositions(q, len(base))
        )
        return LotteryFamily(tuple(base), q, lotteries, True, full)
    rng = random.Random(seed)
    seen = set()
    picked: List[Lottery] = []
    # Diracs first so witnesses stay readable, then random grid points.
    for h in base:
        lot = Lottery.dirac(h)
        picked.append(lot)
        seen.add(lot)
        if len(picked) >= max_size:
            break
    while len(picked) < max_size:
        counts = [0] * len(base)
        for _ in range(q):
            counts[rng.randrange(len(base))] += 1
        lot = _lottery_from_counts(base, counts, q)
        if lot not in seen:
            seen.add(lot)
            picked.append(lot)
    return LotteryFamily(tuple(base), q, tuple(picked), False, full)


def default_family(
    alphabet: Alphabet,
    max_len: int = 2,
    q: int = 4,
    max_size: Optional[int] = 64,
    seed: int = 0,
) -> LotteryFamily:
    """Grid family over all histories of length <= max_len (the default envelope)."""
    return generate_family(alphabet.histories_up_to(max_len), q, max_size, seed)


def default_p_grid() -> Tuple[Rational, ...]:
    """Interior mixing weights with denominators 2..5, deduplicated."""
    grid = []
    for q in (2, 3, 4, 5):
        for k in range(1, q):
            r = Rational(k, q)
            if r not in grid:
                grid.append(r)
    return tuple(sorted(grid, key=float))
