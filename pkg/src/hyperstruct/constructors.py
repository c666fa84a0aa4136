"""Hyperstructures built from raw data: cones, clusterings, organizations, stacks."""
from __future__ import annotations

import math
import os
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Union

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .core import BondId, Hyperstructure, new_hyperstructure
from .errors import (
    EmptyPlan,
    EnumerationOverflow,
    GoalNotMet,
    MissingAggregator,
    MissingRule,
    SubsetTooLarge,
)
from .globalizer import Aggregator, GlobalizerSpec, PropertyAssignment, globalize

DEFAULT_ENUM_CAP = 10_000


def enumeration_cap() -> int:
    """Bond budget for cone enumeration; ``HYPERSTRUCT_ENUM_CAP`` overrides."""
    raw = os.environ.get("HYPERSTRUCT_ENUM_CAP")
    return int(raw) if raw else DEFAULT_ENUM_CAP


def _ids(prefix: str, n: int) -> list[str]:
    width = len(str(max(n - 1, 0)))
    return [f"{prefix}{j:0{width}d}" for j in range(n)]


# -- cones -------------------------------------------------------------------

SubsetSize = Union[int, str]


@dataclass(frozen=True)
class ConeSpec:
    """Subset size to cone at each level above 0.

    An entry may be ``"all"``: every nonempty subset of the level below.
    """

    subset_sizes: tuple[SubsetSize, ...]
    cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "subset_sizes", tuple(self.subset_sizes))
        if not self.subset_sizes:
            raise ValueError("a cone spec needs at least one level")
        for k in self.subset_sizes:
            if k != "all" and (not isinstance(k, int) or k < 1):
                raise ValueError(f"subset sizes are integers >= 1 or 'all', got {k!r}")

    @property
    def levels(self) -> int:
        return len(self.subset_sizes)


def cone_hyperstructure(
    points: Iterable[str], spec: ConeSpec
) -> tuple[Hyperstructure, list[PropertyAssignment]]:
    """Level ``i`` cones subsets of level-``i-1`` bonds.

    The property of a cone is the number of things it cones: the cardinality
    of the point set at level 1, the number of cones below that.  Level 0 has
    an empty assignment.
    """
    cap = spec.cap if spec.cap is not None else enumeration_cap()
    below = sorted(points)
    levels: list[list[str]] = [below]
    bmap: dict[BondId, list[str]] = {}
    props = [PropertyAssignment(0)]
    total = 0

    for i, k in enumerate(spec.subset_sizes, start=1):
        n = len(below)
        sizes = range(1, n + 1) if k == "all" else [k]
        if k != "all" and k > n:
            raise SubsetTooLarge(f"level {i}: cannot cone {k}-subsets of {n} bonds")
        count = sum(math.comb(n, s) for s in sizes)
        total += count
        if total > cap:
            raise EnumerationOverflow(f"cone enumeration needs {total} bonds, cap is {cap}")

        names = _ids(f"c{i}.", count)
        values = {}
        it = iter(names)
        for s in sizes:
            for subset in combinations(below, s):
                name = next(it)
                bmap[BondId(i, name)] = list(subset)
                values[BondId(i, name)] = s
        levels.append(names)
        props.append(PropertyAssignment(i, values))
        below = names
    return new_hyperstructure(levels, bmap), props


# -- clustering --------------------------------------------------------------

@dataclass(frozen=True)
class ClusterLadder:
    dissimilarity: np.ndarray
    thresholds: tuple[float, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        d = np.asarray(self.dissimilarity, dtype=float)
        object.__setattr__(self, "dissimilarity", d)
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("dissimilarity must be a square matrix")
        if not np.all(np.isfinite(d)):
            raise ValueError("dissimilarity entries must be finite")
        if not np.array_equal(d, d.T):
            raise ValueError("dissimilarity must be symmetric")
        if np.any(np.diag(d) != 0):
            raise ValueError("dissimilarity must have a zero diagonal")
        if np.any(d < 0):
            raise ValueError("dissimilarities must be non-negative")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != d.shape[0] or len(set(labels)) != len(labels):
                raise ValueError("need one distinct label per point")
            object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.dissimilarity.shape[0]

    def point_ids(self) -> list[str]:
        return list(self.labels) if self.labels is not None else _ids("p", self.size)

    def merge_heights(self) -> list[float]:
        """Distinct heights at which single linkage merges clusters."""
        if self.size < 2:
            return []
        z = linkage(squareform(self.dissimilarity, checks=False), method="single")
        return sorted(set(float(h) for h in z[:, 2]))


def single_linkage_partition(ladder: ClusterLadder, t: float) -> list[frozenset[int]]:
    """Points whose single-linkage chain distance is at most ``t``, grouped."""
    n = ladder.size
    if n == 0:
        return []
    if n == 1:
        return [frozenset([0])]
    z = linkage(squareform(ladder.dissimilarity, checks=False), method="single")
    flat = fcluster(z, t=t, criterion="distance")
    groups: dict[int, set[int]] = {}
    for point, label in enumerate(flat):
        groups.setdefault(int(label), set()).add(point)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def cluster_hyperstructure(ladder: ClusterLadder) -> Hyperstructure:
    """Level ``l`` holds the single-linkage components at the ``l``-th threshold.

    A component that absorbs nothing new at a threshold is carried up as a
    singleton bond so that every level stays populated.
    """
    points = ladder.point_ids()
    levels: list[list[str]] = [points]
    bmap: dict[BondId, list[str]] = {}

    # component (as point set) -> bond id at the previous level
    previous = {frozenset([j]): points[j] for j in range(ladder.size)}
    for i, t in enumerate(ladder.thresholds, start=1):
        parts = single_linkage_partition(ladder, t)
        names = _ids(f"k{i}.", len(parts))
        current = {}
        for name, part in zip(names, parts):
            members = [bid for comp, bid in previous.items() if comp <= part]
            bmap[BondId(i, name)] = members
            current[part] = name
        levels.append(names)
        previous = current
    return new_hyperstructure(levels, bmap)


# -- organizations -----------------------------------------------------------

@dataclass(frozen=True)
class ProductionRule:
    """``rule(bond, input_products) -> product`` for the bonds of one level."""

    level: int
    rule: Callable[[BondId, list], Any]


@dataclass
class OrganizationResult:
    product: Any
    products: list[PropertyAssignment] = field(default_factory=list)


def organization_pipeline(
    h: Hyperstructure,
    omega0_products: PropertyAssignment | Mapping,
    rules: Sequence[ProductionRule] | Mapping[int, Callable],
    goal: Callable[[Any], bool] | None = None,
) -> OrganizationResult:
    """Agents at level 0 hand products upward; each level produces from its inputs.

    ``products`` holds every level from 0 to the top.  With ``goal`` given,
    :class:`GoalNotMet` is raised unless ``goal(P_n)`` holds.
    """
    if isinstance(rules, Mapping):
        rules = [ProductionRule(level, fn) for level, fn in rules.items()]
    spec = GlobalizerSpec(tuple(Aggregator(r.level, r.rule, "production") for r in rules))
    if not isinstance(omega0_products, PropertyAssignment):
        omega0_products = PropertyAssignment(0, dict(omega0_products))
    try:
        upper = globalize(h, omega0_products, spec)
    except MissingAggregator as exc:
        raise MissingRule(str(exc).replace("aggregator", "production rule")) from exc

    products = [omega0_products] + upper
    top = h.single_top()
    final = products[top.level][top]
    if goal is not None and not goal(final):
        raise GoalNotMet(final, products)
    return OrganizationResult(final, products)


# -- stacking ----------------------------------------------------------------

@dataclass(frozen=True)
class StackMove:
    arity: int
    label: str


@dataclass(frozen=True)
class Restart:
    """Provenance marker: the next move starts over on the finished shapes."""

    note: str = ""


@dataclass(frozen=True)
class StackPlan:
    """Primitive ``alphabet`` (name -> dimension <= 3), the primitive(s) at the
    base, and the moves.  Several base primitives are assigned round-robin to
    the level-0 copies."""

    alphabet: Mapping[str, int]
    base: tuple[str, ...]
    steps: tuple[StackMove | Restart, ...]

    def __post_init__(self):
        base = (self.base,) if isinstance(self.base, str) else tuple(self.base)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "steps", tuple(self.steps))
        for name, d in self.alphabet.items():
            if not isinstance(d, int) or not 0 <= d <= 3:
                raise ValueError(f"primitive {name!r} must have dimension 0..3")
        if not base:
            raise ValueError("a stack needs at least one base primitive")
        for name in base:
            if name not in self.alphabet:
                raise ValueError(f"base primitive {name!r} is not in the alphabet")
        for step in self.steps:
            if isinstance(step, StackMove) and step.arity < 2:
                raise ValueError("stacking moves bind at least two shapes")

    @property
    def moves(self) -> list[StackMove]:
        return [s for s in self.steps if isinstance(s, StackMove)]


@dataclass
class StackResult:
    structure: Hyperstructure
    labels: list[str]
    restarts: list[int]

    @property
    def virtual_dims(self) -> list[int]:
        """Virtual dimension of the shapes at each level, bottom to top."""
        h = self.structure
        return [max(h.dims[b] for b in h.levels[i]) for i in range(h.height + 1)]


def stack(plan: StackPlan) -> StackResult:
    """Bind copies of the previous stage, one level per move.

    The top bond is a single shape; level ``i`` holds the product of the
    remaining arities as distinct copies.  Each move adds one to the virtual
    dimension, without any cap.
    """
    moves = plan.moves
    if not moves:
        raise EmptyPlan("the plan has no stacking moves")

    counts = [1]
    for move in reversed(moves):
        counts.append(counts[-1] * move.arity)
    counts.reverse()  # counts[i] = number of shapes at level i

    base_dim = {}
    levels: list[list[str]] = []
    for i, n in enumerate(counts):
        levels.append(_ids(f"s{i}.", n))
    for j, name in enumerate(levels[0]):
        base_dim[name] = plan.alphabet[plan.base[j % len(plan.base)]]
    top_base = max(base_dim.values())

    bmap = {}
    dims = {BondId(0, name): d for name, d in base_dim.items()}
    for i, move in enumerate(moves, start=1):
        below = levels[i - 1]
        for j, name in enumerate(levels[i]):
            b = BondId(i, name)
            bmap[b] = below[j * move.arity:(j + 1) * move.arity]
            dims[b] = top_base + i
    h = new_hyperstructure(levels, bmap, dims)

    labels = ["+".join(dict.fromkeys(plan.base))] + [m.label for m in moves]
    restarts = []
    done = 0
    for step in plan.steps:
        if isinstance(step, StackMove):
            done += 1
        else:
            restarts.append(done)
    return StackResult(h, labels, restarts)
