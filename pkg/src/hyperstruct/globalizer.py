"""Local-to-global propagation of bond properties and its inverse.

A globalizer is a stack of per-level aggregators: the property of a bond at
level ``i`` is computed from the properties of the level-``i-1`` bonds it
binds.  Running the stack bottom-up turns level-0 properties into a global
top-level property; refiners run the other way.
"""
from __future__ import annotations

import itertools
import numbers
from collections import Counter
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, NamedTuple

from .core import BondId, Hyperstructure, _as_bond, support
from .errors import (
    InfiniteAlphabet,
    MissingAggregator,
    MissingProperty,
    MissingRefiner,
    NotFound,
    NotTopLevel,
    RefinerConflict,
)


@dataclass(frozen=True, order=True)
class Product:
    """An opaque product token, as made by an agent in an organization."""

    token: str

    def __str__(self) -> str:
        return self.token


def order_key(value: Any) -> tuple:
    """Total order over property values: numbers < labels < products < vectors."""
    if isinstance(value, bool):
        return (1, str(value))
    if isinstance(value, numbers.Number):
        return (0, value)
    if isinstance(value, str):
        return (1, value)
    if isinstance(value, Product):
        return (2, value.token)
    if isinstance(value, (tuple, list)):
        return (3, tuple(order_key(v) for v in value))
    raise TypeError(f"unsupported property value {value!r}")


@dataclass
class PropertyAssignment:
    level: int
    values: dict[BondId, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.values = {_as_bond(k, self.level): v for k, v in self.values.items()}
        for b in self.values:
            if b.level != self.level:
                raise ValueError(f"{b} does not belong to level {self.level}")

    def __getitem__(self, b) -> Any:
        return self.values[_as_bond(b, self.level)]

    def get(self, b, default=None) -> Any:
        return self.values.get(_as_bond(b, self.level), default)

    def __contains__(self, b) -> bool:
        return _as_bond(b, self.level) in self.values

    def __len__(self) -> int:
        return len(self.values)


# -- aggregators -------------------------------------------------------------

def _sum(bond, values):
    return sum(values)


def _max(bond, values):
    return max(values, key=order_key)


def _majority(bond, values):
    counts = Counter(values)
    best = max(counts.values())
    # ties go to the least value in the total order
    return min((v for v, c in counts.items() if c == best), key=order_key)


def _concat(bond, values):
    ordered = sorted(values, key=order_key)
    if ordered and all(isinstance(v, Product) for v in ordered):
        return Product("".join(v.token for v in ordered))
    return "".join(str(v) for v in ordered)


AGGREGATOR_RULES: dict[str, Callable[[BondId, list], Any]] = {
    "sum": _sum,
    "max": _max,
    "majority_vote": _majority,
    "concat": _concat,
}
AGGREGATOR_ALIASES = {"vote": "majority_vote", "majority": "majority_vote"}


@dataclass(frozen=True)
class Aggregator:
    """``rule(bond, member_values) -> value`` for the bonds of one level.

    ``member_values`` is a list ordered by member id; repeated values are kept.
    """

    level: int
    rule: Callable[[BondId, list], Any]
    kind: str = "custom"

    @classmethod
    def of(cls, kind: str, level: int) -> Aggregator:
        kind = AGGREGATOR_ALIASES.get(kind, kind)
        if kind not in AGGREGATOR_RULES:
            raise ValueError(f"unknown aggregator kind {kind!r}")
        return cls(level, AGGREGATOR_RULES[kind], kind)

    def __call__(self, bond: BondId, values: list) -> Any:
        return self.rule(bond, values)


Compatibility = Callable[[BondId, Any, BondId, Any], bool]


@dataclass(frozen=True)
class GlobalizerSpec:
    aggregators: tuple[Aggregator, ...]
    compatibility: Compatibility | None = None

    def __post_init__(self):
        levels = [a.level for a in self.aggregators]
        if len(set(levels)) != len(levels):
            raise ValueError("at most one aggregator per level")

    @classmethod
    def uniform(cls, kind: str, height: int, compatibility: Compatibility | None = None) -> GlobalizerSpec:
        return cls(tuple(Aggregator.of(kind, i) for i in range(1, height + 1)), compatibility)

    @classmethod
    def from_kinds(cls, kinds: Sequence[str], compatibility: Compatibility | None = None) -> GlobalizerSpec:
        """``kinds[0]`` aggregates level 1, ``kinds[1]`` level 2, and so on."""
        return cls(tuple(Aggregator.of(k, i) for i, k in enumerate(kinds, start=1)), compatibility)

    def at(self, level: int) -> Aggregator:
        for a in self.aggregators:
            if a.level == level:
                return a
        raise MissingAggregator(f"no aggregator for level {level}")


def _member_values(h: Hyperstructure, b: BondId, below: Mapping[BondId, Any]) -> list:
    return [below[m] for m in sorted(h.boundary[b])]


def _required_base(h: Hyperstructure) -> list[BondId]:
    if h.height == 0:
        return []
    needed = set()
    for t in h.levels[h.height]:
        needed |= support(h, t)
    return sorted(needed)


def globalize(
    h: Hyperstructure,
    omega0: PropertyAssignment | Mapping,
    spec: GlobalizerSpec,
) -> list[PropertyAssignment]:
    """Aggregate level-0 properties level by level up to the top.

    Returns the assignments for levels ``1 .. n`` (empty for a one-level
    structure).
    """
    if not isinstance(omega0, PropertyAssignment):
        omega0 = PropertyAssignment(0, dict(omega0))
    for b in _required_base(h):
        if b not in omega0.values:
            raise MissingProperty(b)

    out = []
    below = omega0.values
    for i in range(1, h.height + 1):
        agg = spec.at(i)
        values = {b: agg(b, _member_values(h, b, below)) for b in h.level(i)}
        out.append(PropertyAssignment(i, values))
        below = values
    return out


class GluingReport(NamedTuple):
    ok: bool
    inconsistent: list[BondId]
    incompatible: list[tuple[BondId, BondId]]

    def bonds(self) -> set[BondId]:
        """Every bond named by a failure."""
        return set(self.inconsistent) | {b for pair in self.incompatible for b in pair}


def check_gluing(
    h: Hyperstructure,
    assignments: Sequence[PropertyAssignment],
    spec: GlobalizerSpec,
) -> GluingReport:
    """Does this family of levelwise assignments glue into a globalizer?

    ``assignments[i]`` holds level ``i``.  A bond is *inconsistent* when its
    value differs from what its level's aggregator makes of the level below;
    a same-level pair with overlapping boundaries is *incompatible* when the
    spec's compatibility predicate rejects it.
    """
    by_level = {a.level: a.values for a in assignments}
    inconsistent = []
    incompatible = []
    for i in range(1, h.height + 1):
        here = by_level.get(i, {})
        below = by_level.get(i - 1, {})
        agg = spec.at(i)
        for b in h.level(i):
            members = sorted(h.boundary[b])
            if b not in here or any(m not in below for m in members):
                inconsistent.append(b)
                continue
            if agg(b, [below[m] for m in members]) != here[b]:
                inconsistent.append(b)
        if spec.compatibility is None:
            continue
        for b1, b2 in itertools.combinations(h.level(i), 2):
            if not (h.boundary[b1] & h.boundary[b2]):
                continue
            if b1 not in here or b2 not in here:
                continue
            if not spec.compatibility(b1, here[b1], b2, here[b2]):
                incompatible.append((b1, b2))
    return GluingReport(not inconsistent and not incompatible, inconsistent, incompatible)


# -- global to local ---------------------------------------------------------

RefineRule = Callable[[BondId, Any, list], Mapping[BondId, Any]]


def _even_split(bond, target, members):
    n = len(members)
    if isinstance(target, float):
        share = target / n
    else:
        share = Fraction(target) / n
        if share.denominator == 1:
            share = int(share)
    return {m: share for m in members}


def _constant(bond, target, members):
    return {m: target for m in members}


REFINER_RULES: dict[str, RefineRule] = {"even_split": _even_split, "constant": _constant}
REFINER_ALIASES = {"split": "even_split"}


@dataclass(frozen=True)
class Refiner:
    """``rule(bond, target, members) -> {member: target}`` for bonds of one level."""

    level: int
    rule: RefineRule
    kind: str = "custom"

    @classmethod
    def of(cls, kind: str, level: int) -> Refiner:
        kind = REFINER_ALIASES.get(kind, kind)
        if kind not in REFINER_RULES:
            raise ValueError(f"unknown refiner kind {kind!r}")
        return cls(level, REFINER_RULES[kind], kind)


def uniform_refiners(kind: str, height: int) -> list[Refiner]:
    return [Refiner.of(kind, i) for i in range(1, height + 1)]


def localize(
    h: Hyperstructure,
    top: BondId,
    target: Any,
    refiners: Iterable[Refiner],
) -> PropertyAssignment:
    """Push a target value for a top bond down to its level-0 support.

    A bond reached along several paths must receive equal targets on all of
    them, otherwise :class:`RefinerConflict` is raised.
    """
    top = _as_bond(top)
    if top not in h or top.level != h.height:
        raise NotTopLevel(f"{top} is not a top-level bond", top)
    by_level = {}
    for r in refiners:
        by_level[r.level] = r

    current = {top: target}
    for i in range(h.height, 0, -1):
        if i not in by_level:
            raise MissingRefiner(f"no refiner for level {i}")
        rule = by_level[i].rule
        nxt: dict[BondId, Any] = {}
        for b in sorted(current):
            members = sorted(h.boundary[b])
            pushed = rule(b, current[b], members)
            if set(pushed) != set(members):
                raise ValueError(f"refiner for level {i} must target exactly the members of {b}")
            for m in members:
                if m in nxt and nxt[m] != pushed[m]:
                    raise RefinerConflict(m, nxt[m], pushed[m])
                nxt[m] = pushed[m]
        current = nxt
    return PropertyAssignment(0, current)


# -- minimal intervention ----------------------------------------------------

def _finite_alphabet(omega0: PropertyAssignment, desired: Any, alphabet) -> list:
    if alphabet is None:
        seen = list(omega0.values.values()) + [desired]
        if any(isinstance(v, numbers.Number) and not isinstance(v, bool) for v in seen):
            raise InfiniteAlphabet("numeric properties need an explicit finite alphabet")
        alphabet = seen
    elif not hasattr(alphabet, "__len__"):
        raise InfiniteAlphabet("alphabet must be a finite collection")
    return sorted(set(alphabet), key=order_key)


def top_value(h: Hyperstructure, omega0, spec: GlobalizerSpec, top: BondId | None = None) -> Any:
    """Global value of ``top`` (the unique top bond by default)."""
    if not isinstance(omega0, PropertyAssignment):
        omega0 = PropertyAssignment(0, dict(omega0))
    top = h.single_top() if top is None else _as_bond(top)
    if top.level == 0:
        return omega0[top]
    return globalize(h, omega0, spec)[top.level - 1][top]


def minimal_flip(
    h: Hyperstructure,
    omega0: PropertyAssignment | Mapping,
    spec: GlobalizerSpec,
    desired_top: Any,
    budget: int,
    alphabet: Iterable | None = None,
    top: BondId | None = None,
) -> dict[BondId, Any]:
    """Smallest set of level-0 changes that makes the top value ``desired_top``.

    Exhaustive: change sets are tried by size (0, 1, ... ``budget``), then by
    bond ids in lexicographic order, then by replacement values in the total
    order of :func:`order_key`.  The first success is returned as
    ``{bond: new_value}``.  Cost grows as ``C(N, k) * (|alphabet| - 1) ** k``.
    """
    if not isinstance(omega0, PropertyAssignment):
        omega0 = PropertyAssignment(0, dict(omega0))
    top = h.single_top() if top is None else _as_bond(top)
    letters = _finite_alphabet(omega0, desired_top, alphabet)
    if top_value(h, omega0, spec, top) == desired_top:
        return {}

    candidates = sorted(support(h, top))
    base = dict(omega0.values)

    for k in range(1, budget + 1):
        for chosen in itertools.combinations(candidates, k):
            options = [[v for v in letters if v != base[b]] for b in chosen]
            for replacement in itertools.product(*options):
                trial = dict(base)
                trial.update(zip(chosen, replacement))
                if top_value(h, PropertyAssignment(0, trial), spec, top) == desired_top:
                    return dict(zip(chosen, replacement))
    raise NotFound(f"no change set of size <= {budget} reaches {desired_top!r}")
