"""Sets of local photon-number sectors.

A subspace is a (possibly infinite) set of sector labels N. Infinite sets are
always of the form "explicit finite part plus every N >= k", which covers the
full space, the non-vacuum space and open ranges such as ``"3-"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class Subspace:
    """Sector set ``sectors | {N : N >= tail_from}``."""

    sectors: frozenset[int] = frozenset()
    tail_from: int | None = None

    def __post_init__(self):
        if any(n < 0 for n in self.sectors):
            raise ValueError("sector labels must be non-negative")
        if self.tail_from is not None and self.tail_from < 0:
            raise ValueError("tail_from must be non-negative")
        # canonical form: absorb explicit sectors that touch the tail
        tail = self.tail_from
        sectors = set(self.sectors)
        if tail is not None:
            sectors = {n for n in sectors if n < tail}
            while tail - 1 in sectors:
                sectors.discard(tail - 1)
                tail -= 1
        object.__setattr__(self, "sectors", frozenset(sectors))
        object.__setattr__(self, "tail_from", tail)

    @classmethod
    def of(cls, sectors: Iterable[int]) -> "Subspace":
        return cls(frozenset(int(n) for n in sectors))

    @classmethod
    def at_least(cls, k: int) -> "Subspace":
        return cls(frozenset(), int(k))

    @classmethod
    def parse(cls, text: str | "Subspace") -> "Subspace":
        """Parse ``"full"``, ``"nonvacuum"`` or a list such as ``"1-4,6,9-"``."""
        if isinstance(text, Subspace):
            return text
        desc = text.strip().lower()
        if desc == "full":
            return FULL
        if desc == "nonvacuum":
            return NONVACUUM
        if not desc:
            raise ValueError("empty subspace description")
        sectors: set[int] = set()
        tail = None
        for item in desc.split(","):
            item = item.strip()
            try:
                if item.endswith("-"):
                    start = int(item[:-1])
                    tail = start if tail is None else min(tail, start)
                elif "-" in item:
                    lo, hi = (int(p) for p in item.split("-", 1))
                    if hi < lo:
                        raise ValueError(f"descending range {item!r}")
                    sectors.update(range(lo, hi + 1))
                else:
                    sectors.add(int(item))
            except ValueError as exc:
                raise ValueError(f"bad subspace item {item!r}: {exc}") from None
        return cls(frozenset(sectors), tail)

    def __contains__(self, n: int) -> bool:
        return n in self.sectors or (self.tail_from is not None and n >= self.tail_from)

    @property
    def is_empty(self) -> bool:
        return not self.sectors and self.tail_from is None

    @property
    def is_finite(self) -> bool:
        return self.tail_from is None

    @property
    def min_sector(self) -> int:
        if self.is_empty:
            raise ValueError("empty subspace has no minimum")
        candidates = list(self.sectors)
        if self.tail_from is not None:
            candidates.append(self.tail_from)
        return min(candidates)

    def upto(self, n_max: int) -> list[int]:
        """Sorted member sectors with N <= n_max."""
        return [n for n in range(n_max + 1) if n in self]

    def __iter__(self) -> Iterator[int]:
        if not self.is_finite:
            raise TypeError("cannot iterate an infinite subspace; use upto()")
        return iter(sorted(self.sectors))

    def label(self) -> str:
        if self == FULL:
            return "full"
        if self == NONVACUUM:
            return "nonvacuum"
        parts = []
        run: list[int] = []
        for n in sorted(self.sectors):
            if run and n == run[-1] + 1:
                run.append(n)
                continue
            if run:
                parts.append(_fmt_run(run))
            run = [n]
        if run:
            parts.append(_fmt_run(run))
        if self.tail_from is not None:
            parts.append(f"{self.tail_from}-")
        return ",".join(parts)

    def __str__(self) -> str:
        return self.label()


def _fmt_run(run: list[int]) -> str:
    return str(run[0]) if len(run) == 1 else f"{run[0]}-{run[-1]}"


FULL = Subspace(frozenset(), 0)
NONVACUUM = Subspace(frozenset(), 1)
