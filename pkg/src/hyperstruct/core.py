"""Levels of bonds, boundary maps, supports and structural edits.

A hyperstructure is an ordered list of bond sets ``B0 .. Bn``.  Every bond at
level ``i + 1`` binds a nonempty set of level-``i`` bonds (its boundary).
Structures are immutable; :func:`fuse` and :func:`fission` return new values.
"""
from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any, NamedTuple

from .errors import (
    RULE_ERRORS,
    AmbiguousTop,
    CarrierMismatch,
    DuplicateId,
    EmptyMembers,
    LevelSkew,
    LevelZero,
    MixedLevels,
    NotTopLevel,
    StillReferenced,
    StructureError,
    UnknownBond,
)


class BondId(NamedTuple):
    """A bond is addressed by its level and a string id unique within the level."""

    level: int
    local_id: str

    def __str__(self) -> str:
        return f"{self.level}:{self.local_id}"

    @classmethod
    def parse(cls, text: str) -> BondId:
        """Inverse of ``str``: ``"2:w"`` -> ``BondId(2, "w")``."""
        level, sep, local_id = text.partition(":")
        if not sep or not level.strip().isdigit():
            raise ValueError(f"bond reference must look like LEVEL:ID, got {text!r}")
        return cls(int(level), local_id)


def _as_bond(item: Any, level: int | None = None) -> BondId:
    if isinstance(item, BondId):
        return item
    if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], int):
        return BondId(item[0], _as_token(item[1]))
    if level is None:
        raise TypeError(f"cannot infer the level of bond {item!r}")
    return BondId(level, _as_token(item))


def _as_token(item: Any) -> str:
    if not isinstance(item, str):
        raise TypeError(f"bond ids are strings, got {item!r}")
    return item


class Violation(NamedTuple):
    rule: str
    bond: BondId | None
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_first(self) -> None:
        if self.violations:
            rule, bond, message = self.violations[0]
            raise RULE_ERRORS.get(rule, StructureError)(message, bond)

    def to_dict(self) -> dict:
        def rows(items):
            return [
                {"rule": v.rule, "bond": None if v.bond is None else str(v.bond), "message": v.message}
                for v in items
            ]

        return {"ok": self.ok, "violations": rows(self.violations), "warnings": rows(self.warnings)}


@dataclass(frozen=True)
class Hyperstructure:
    """Bond sets per level plus the boundary map.

    The constructor stores what it is given without checking; use
    :func:`new_hyperstructure` (or :func:`from_layers`) for a validated build and
    :func:`validate` to inspect an arbitrary instance.
    """

    levels: tuple[frozenset[BondId], ...]
    boundary: Mapping[BondId, frozenset[BondId]]
    dims: Mapping[BondId, int] | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    __hash__ = None  # mappings inside; equality is structural

    @property
    def height(self) -> int:
        return len(self.levels) - 1

    def level(self, i: int) -> list[BondId]:
        """Bonds at level ``i`` in canonical order."""
        return sorted(self.levels[i])

    def bonds(self) -> Iterator[BondId]:
        for i in range(len(self.levels)):
            yield from self.level(i)

    def top(self) -> list[BondId]:
        return self.level(self.height)

    def single_top(self) -> BondId:
        tops = self.top()
        if len(tops) != 1:
            raise AmbiguousTop(f"expected one top-level bond, found {len(tops)}")
        return tops[0]

    def __contains__(self, b: object) -> bool:
        return (
            isinstance(b, tuple)
            and len(b) == 2
            and isinstance(b[0], int)
            and 0 <= b[0] < len(self.levels)
            and b in self.levels[b[0]]
        )

    def __len__(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def referrers(self, b: BondId) -> frozenset[BondId]:
        """Bonds one level up whose boundary contains ``b``."""
        index = self._cache.get("referrers")
        if index is None:
            index = {}
            for parent, members in self.boundary.items():
                for m in members:
                    index.setdefault(m, set()).add(parent)
            index = {k: frozenset(v) for k, v in index.items()}
            self._cache["referrers"] = index
        return index.get(b, frozenset())

    def dim(self, b: BondId) -> int | None:
        return None if self.dims is None else self.dims.get(b)


def _check(levels, boundary, dims) -> ValidationReport:
    report = ValidationReport()
    bad = report.violations.append
    present = set()

    for i, bonds in enumerate(levels):
        for b in bonds:
            if b.level != i:
                bad(Violation("LevelSkew", b, f"{b} is listed under level {i}"))
            present.add(b)

    top_nonempty = max((i for i, bonds in enumerate(levels) if bonds), default=0)
    for i in range(1, len(levels)):
        if not levels[i]:
            where = "below a nonempty level" if i < top_nonempty else "at the top"
            bad(Violation("EmptyLevel", None, f"level {i} is empty {where}"))
    if top_nonempty > 0 and not levels[0]:
        bad(Violation("EmptyLevel", None, "level 0 is empty below a nonempty level"))

    for b in sorted(boundary):
        members = boundary[b]
        if b not in present:
            bad(Violation("UnknownBond", b, f"boundary given for {b}, which is not a bond"))
            continue
        if b.level == 0:
            bad(Violation("UnknownBond", b, f"level-0 bond {b} cannot have a boundary"))
            continue
        if not members:
            bad(Violation("EmptyBoundary", b, f"{b} binds nothing"))
            continue
        for m in sorted(members):
            if m.level != b.level - 1:
                bad(Violation("LevelSkew", b, f"{b} binds {m}, which is not one level down"))
            elif m not in present:
                bad(Violation("DanglingReference", b, f"{b} binds {m}, which does not exist"))
        if len(members) == 1:
            report.warnings.append(Violation("DegenerateBond", b, f"{b} binds a single bond"))

    for b in sorted(present):
        if b.level >= 1 and b not in boundary:
            bad(Violation("MissingBoundary", b, f"{b} has no boundary"))

    if dims is not None:
        for b in sorted(dims):
            if b not in present:
                bad(Violation("UnknownBond", b, f"dimension given for unknown bond {b}"))
        for b in sorted(present):
            if b not in dims:
                bad(Violation("MonotoneDim", b, f"{b} has no dimension"))
                continue
            below = [dims[m] for m in boundary.get(b, ()) if m in dims]
            if below and dims[b] < max(below):
                bad(Violation("MonotoneDim", b, f"dim {dims[b]} of {b} is below member dim {max(below)}"))
    return report


def validate(h: Hyperstructure) -> ValidationReport:
    """Check every structural rule and report all violations at once."""
    return _check(h.levels, h.boundary, h.dims)


def new_hyperstructure(
    levels: Iterable[Iterable[Any]],
    boundary: Mapping[Any, Iterable[Any]] | None = None,
    dims: Mapping[Any, int] | None = None,
) -> Hyperstructure:
    """Build and validate a structure, raising the first violation found.

    Level entries may be :class:`BondId` values or bare string ids (placed at
    the level they are listed under).  Boundary keys must be bonds; boundary
    members may be bare ids, which resolve one level below their key.
    """
    level_sets = []
    for i, items in enumerate(levels):
        seen: set[BondId] = set()
        for item in items:
            b = _as_bond(item, i)
            if b in seen:
                raise DuplicateId(f"{b} listed twice", b)
            seen.add(b)
        level_sets.append(frozenset(seen))
    if not level_sets:
        raise ValueError("a hyperstructure needs at least one level")

    bmap = {}
    for key, members in (boundary or {}).items():
        k = _as_bond(key)
        if k in bmap:
            raise DuplicateId(f"boundary for {k} given twice", k)
        bmap[k] = frozenset(_as_bond(m, k.level - 1) for m in members)
    dmap = None if dims is None else {_as_bond(k): int(v) for k, v in dims.items()}

    report = _check(level_sets, bmap, dmap)
    report.raise_first()
    return Hyperstructure(tuple(level_sets), bmap, dmap)


def from_layers(
    base: Iterable[str],
    *layers: Mapping[str, Iterable[str]],
    dims: Mapping[Any, int] | None = None,
) -> Hyperstructure:
    """Nested-literal constructor.

    >>> h = from_layers(["a", "b", "c"], {"x": ["a", "b"], "y": ["b", "c"]}, {"t": ["x", "y"]})
    >>> h.height
    2
    """
    levels: list[list[Any]] = [list(base)]
    boundary = {}
    for i, layer in enumerate(layers, start=1):
        levels.append(list(layer))
        for key, members in layer.items():
            boundary[BondId(i, key)] = list(members)
    return new_hyperstructure(levels, boundary, dims)


def _require(h: Hyperstructure, b: BondId) -> BondId:
    b = _as_bond(b)
    if b not in h:
        raise UnknownBond(f"{b} is not a bond of this structure", b)
    return b


def boundary(h: Hyperstructure, b: BondId) -> frozenset[BondId]:
    b = _require(h, b)
    if b.level == 0:
        raise LevelZero(f"{b} is a level-0 bond and has no boundary", b)
    return h.boundary[b]


def support(h: Hyperstructure, b: BondId) -> frozenset[BondId]:
    """Level-0 bonds reachable from ``b`` by iterating the boundary map."""
    b = _require(h, b)
    cache = h._cache.setdefault("support", {})
    # iterative post-order so tall structures do not hit the recursion limit
    stack = [b]
    while stack:
        cur = stack[-1]
        if cur in cache:
            stack.pop()
            continue
        if cur.level == 0:
            cache[cur] = frozenset([cur])
            stack.pop()
            continue
        pending = [m for m in h.boundary[cur] if m not in cache]
        if pending:
            stack.extend(pending)
            continue
        cache[cur] = frozenset().union(*(cache[m] for m in h.boundary[cur]))
        stack.pop()
    return cache[b]


def fuse(
    h: Hyperstructure,
    level: int,
    members: Iterable[BondId],
    new_id: str,
    dim: int | None = None,
) -> Hyperstructure:
    """Add one bond at ``level + 1`` binding ``members``.

    Fusing at the current top level grows the structure by one level.  When
    the structure carries dimensions the new bond gets ``dim`` or, by default,
    one more than its highest member.
    """
    members = frozenset(_as_bond(m, level) for m in members)
    if not members:
        raise EmptyMembers("fuse needs at least one member")
    if {m.level for m in members} != {level}:
        raise MixedLevels(f"members must all be at level {level}")
    for m in members:
        _require(h, m)
    new = BondId(level + 1, _as_token(new_id))
    if new in h:
        raise DuplicateId(f"{new} already exists", new)

    levels = list(h.levels)
    if level + 1 == len(levels):
        levels.append(frozenset())
    levels[level + 1] = levels[level + 1] | {new}
    bmap = dict(h.boundary)
    bmap[new] = members
    dmap = None
    if h.dims is not None:
        dmap = dict(h.dims)
        dmap[new] = dim if dim is not None else 1 + max(h.dims[m] for m in members)
    return Hyperstructure(tuple(levels), bmap, dmap)


def upward_closure(h: Hyperstructure, b: BondId) -> set[BondId]:
    """``b`` and every bond that binds it, directly or transitively."""
    seen = {b}
    frontier = [b]
    while frontier:
        cur = frontier.pop()
        for parent in h.referrers(cur):
            if parent not in seen:
                seen.add(parent)
                frontier.append(parent)
    return seen


def delete(h: Hyperstructure, b: BondId, cascade: bool = False) -> Hyperstructure:
    """Remove a bond at any level; with ``cascade`` also every bond above it."""
    b = _require(h, b)
    doomed = upward_closure(h, b)
    if not cascade and len(doomed) > 1:
        by = ", ".join(str(p) for p in sorted(h.referrers(b)))
        raise StillReferenced(f"{b} is bound by {by}", b)

    levels = [lv - doomed for lv in h.levels]
    while len(levels) > 1 and not levels[-1]:
        levels.pop()
    bmap = {k: v for k, v in h.boundary.items() if k not in doomed}
    dmap = None if h.dims is None else {k: v for k, v in h.dims.items() if k not in doomed}
    return Hyperstructure(tuple(levels), bmap, dmap)


def fission(
    h: Hyperstructure, b: BondId, cascade: bool = False
) -> tuple[Hyperstructure, frozenset[BondId]]:
    """Dissolve bond ``b`` and hand back the bonds it used to bind."""
    freed = boundary(h, b)
    return delete(h, b, cascade=cascade), freed


@dataclass(frozen=True)
class HigherSpace:
    carrier: frozenset[str]
    structure: Hyperstructure


def as_higher_space(carrier: Iterable[Any], h: Hyperstructure) -> HigherSpace:
    points = frozenset(_as_bond(x, 0).local_id for x in carrier)
    base = frozenset(b.local_id for b in h.levels[0])
    if points != base:
        missing = sorted(base - points)
        extra = sorted(points - base)
        raise CarrierMismatch(f"carrier differs from level 0 (missing {missing}, extra {extra})")
    validate(h).raise_first()
    return HigherSpace(points, h)


@dataclass(frozen=True)
class BondTree:
    bond: BondId
    children: tuple[BondTree, ...] = ()

    def leaves(self) -> list[BondId]:
        if not self.children:
            return [self.bond]
        return [leaf for child in self.children for leaf in child.leaves()]

    def walk(self) -> Iterator[BondTree]:
        yield self
        for child in self.children:
            yield from child.walk()

    def to_nested(self) -> Any:
        """``str`` for a leaf, ``{bond: [children...]}`` otherwise."""
        if not self.children:
            return str(self.bond)
        return {str(self.bond): [c.to_nested() for c in self.children]}


def _unfold(h: Hyperstructure, b: BondId) -> BondTree:
    if b.level == 0:
        return BondTree(b)
    return BondTree(b, tuple(_unfold(h, m) for m in sorted(h.boundary[b])))


def top_representation(h: Hyperstructure, x: BondId) -> BondTree:
    """Unfold a top-level bond into the full tree down to level 0.

    Shared members (overlapping boundaries) appear once per path.
    """
    x = _require(h, x)
    if x.level != h.height:
        raise NotTopLevel(f"{x} is not at the top level {h.height}", x)
    return _unfold(h, x)


def signature(h: Hyperstructure, b: BondId) -> tuple[int, frozenset[str]]:
    """``(level, ids of the supporting level-0 bonds)``; stable across rebuilds."""
    return b.level, frozenset(p.local_id for p in support(h, b))
