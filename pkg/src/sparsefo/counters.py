"""Abstract work-unit counters.

Counters measure basic steps (vertices touched, list recomputations, lookups)
rather than wall time, so scaling claims can be checked independently of the
machine.  A ``Counters`` object is passed explicitly; there is no global state.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable


class Counters:
    """Monotone named counters serialised as ``name value`` lines."""

    __slots__ = ("_c", "enabled")

    def __init__(self, enabled: bool = True) -> None:
        self._c: Counter[str] = Counter()
        self.enabled = enabled

    def add(self, name: str, amount: int = 1) -> None:
        if self.enabled:
            self._c[name] += amount

    def __getitem__(self, name: str) -> int:
        return self._c.get(name, 0)

    def names(self) -> list[str]:
        return sorted(self._c)

    def snapshot(self) -> dict[str, int]:
        return dict(sorted(self._c.items()))

    def diff(self, before: dict[str, int]) -> dict[str, int]:
        """Counts accumulated since ``before`` (a previous snapshot)."""
        out = {}
        for name, value in self._c.items():
            delta = value - before.get(name, 0)
            if delta:
                out[name] = delta
        return dict(sorted(out.items()))

    def merge(self, other: "Counters", prefix: str = "") -> None:
        for name, value in other._c.items():
            self.add(prefix + name, value)

    def report(self, names: Iterable[str] | None = None) -> str:
        keys = sorted(self._c) if names is None else list(names)
        return "".join(f"{k} {self._c.get(k, 0)}\n" for k in keys)


NULL_COUNTERS = Counters(enabled=False)
