"""Birth and death of bonds across a one-parameter family of structures."""
from __future__ import annotations

import csv
import io
from collections.abc import Callable, Hashable, Sequence
from dataclasses import dataclass

from .core import BondId, Hyperstructure, signature
from .errors import BuilderFailure

Matcher = Callable[[Hyperstructure, BondId], Hashable]


@dataclass(frozen=True)
class ParametrizedFamily:
    """``builder(t)`` for each ``t`` in a strictly increasing grid.

    Bonds are matched across parameters by ``matching(h, b)``; the default is
    ``(level, support)``, since bond ids are not stable between builds.
    """

    parameter_grid: tuple[float, ...]
    builder: Callable[[float], Hyperstructure]
    matching: Matcher = signature

    def __post_init__(self):
        object.__setattr__(self, "parameter_grid", tuple(self.parameter_grid))
        grid = self.parameter_grid
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("parameter grid must be strictly increasing")


@dataclass(frozen=True)
class PersistenceInterval:
    """Bond ``signature`` exists for grid values in ``[birth, death)``.

    ``death`` is ``None`` when the bond is still alive at the last grid value
    ``horizon``.
    """

    signature: Hashable
    birth: float
    death: float | None = None
    horizon: float | None = None

    @property
    def level(self) -> int | None:
        sig = self.signature
        return sig[0] if isinstance(sig, tuple) and sig and isinstance(sig[0], int) else None

    @property
    def support(self) -> tuple[str, ...]:
        sig = self.signature
        if isinstance(sig, tuple) and len(sig) == 2 and isinstance(sig[1], frozenset):
            return tuple(sorted(sig[1]))
        return ()

    def alive_at(self, t: float) -> bool:
        return self.birth <= t and (self.death is None or t < self.death)

    def length(self, horizon: float | None = None) -> float:
        if self.death is not None:
            return self.death - self.birth
        end = horizon if horizon is not None else self.horizon
        if end is None:
            raise ValueError("an open interval needs a horizon to have a length")
        return end - self.birth


def _signatures(h: Hyperstructure, matching: Matcher) -> set:
    return {matching(h, b) for b in h.bonds()}


def snapshots(family: ParametrizedFamily) -> list[tuple[float, set]]:
    out = []
    for t in family.parameter_grid:
        try:
            h = family.builder(t)
        except Exception as exc:
            raise BuilderFailure(t, exc) from exc
        out.append((t, _signatures(h, family.matching)))
    return out


def sweep(family: ParametrizedFamily) -> list[PersistenceInterval]:
    """Maximal runs of consecutive grid points at which each signature exists."""
    grid = family.parameter_grid
    horizon = grid[-1] if grid else None
    alive: dict[Hashable, float] = {}
    out = []
    for t, sigs in snapshots(family):
        for sig in list(alive):
            if sig not in sigs:
                out.append(PersistenceInterval(sig, alive.pop(sig), t, horizon))
        for sig in sigs:
            alive.setdefault(sig, t)
    for sig, birth in alive.items():
        out.append(PersistenceInterval(sig, birth, None, horizon))
    return sorted(out, key=lambda iv: (iv.birth, _tie_key(iv)))


def _tie_key(iv: PersistenceInterval) -> tuple:
    level = iv.level
    return (level if level is not None else -1, iv.support, repr(iv.signature))


def stability_rank(
    intervals: Sequence[PersistenceInterval], horizon: float | None = None
) -> list[PersistenceInterval]:
    """Longest-lived first; ties by level, then support.

    Open intervals are measured up to ``horizon``; by default each interval's
    own horizon (the end of its sweep grid), else the last value seen.
    """
    if horizon is None and any(iv.death is None and iv.horizon is None for iv in intervals):
        ends = [iv.birth for iv in intervals] + [iv.death for iv in intervals if iv.death is not None]
        horizon = max(ends, default=0.0)
    return sorted(intervals, key=lambda iv: (-iv.length(horizon), _tie_key(iv), iv.birth))


def intervals_to_csv(intervals: Sequence[PersistenceInterval]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["signature", "level", "birth", "death"])
    for iv in intervals:
        w.writerow([" ".join(iv.support), iv.level, iv.birth, "" if iv.death is None else iv.death])
    return buf.getvalue()


def intervals_to_json(intervals: Sequence[PersistenceInterval]) -> list[dict]:
    return [
        {"level": iv.level, "support": list(iv.support), "birth": iv.birth, "death": iv.death}
        for iv in intervals
    ]
