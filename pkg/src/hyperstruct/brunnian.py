"""Combinatorial Brunnian checks, Brunnian generators and H-complexes.

A bond is Brunnian when dropping any single member leaves nothing bound
among the rest: no other bond of the same level binds two or more of the
remaining members.  Only bond existence is looked at; there is no topology.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations

from .core import (
    BondId,
    Hyperstructure,
    ValidationReport,
    Violation,
    _as_bond,
    boundary,
    delete,
    new_hyperstructure,
)
from .errors import CyclicSubfaces, DegenerateBond, InvalidComplex


@dataclass(frozen=True)
class BrunnianSpec:
    """Explicit group sizes plus iteration order.

    ``BrunnianSpec.of_type(3, 3)`` is the type ``(3, 3)``: three
    groups of three.  A single-entry type ``(k,)`` is one group of ``k``.
    """

    group_sizes: tuple[int, ...]
    order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "group_sizes", tuple(int(s) for s in self.group_sizes))
        if not self.group_sizes:
            raise ValueError("at least one group is needed")
        if any(s < 2 for s in self.group_sizes):
            raise ValueError("group sizes must be >= 2")
        if self.order < 1:
            raise ValueError("order must be >= 1")

    @classmethod
    def of_type(cls, *type_: int, order: int = 1) -> BrunnianSpec:
        if len(type_) == 1:
            return cls((type_[0],), order)
        if len(type_) == 2:
            groups, size = type_
            if groups < 1:
                raise ValueError("number of groups must be >= 1")
            return cls((size,) * groups, order)
        raise ValueError("a Brunnian type is (size,) or (groups, size)")

    @property
    def vertex_count(self) -> int:
        return sum(self.group_sizes) * len(self.group_sizes) ** (self.order - 1)


def is_brunnian_bond(h: Hyperstructure, b: BondId) -> bool:
    members = boundary(h, b)
    if len(members) < 2:
        raise DegenerateBond(f"{b} binds a single bond")
    for other in h.levels[b.level]:
        if other == b:
            continue
        theirs = h.boundary[other]
        # a residual multi-bond survives some single removal iff it sits
        # strictly inside our boundary
        if len(theirs) >= 2 and theirs < members:
            return False
    return True


def build_brunnian(spec: BrunnianSpec) -> Hyperstructure:
    """Groups bound individually, then all groups bound by one top bond.

    Each further order replicates the previous construction once per group
    and binds the copies' tops, adding one level.
    """
    levels: list[list[BondId]] = []
    bmap: dict[BondId, list[BondId]] = {}

    def block(order: int, prefix: str) -> BondId:
        if order == 1:
            group_bonds = []
            for g, size in enumerate(spec.group_sizes):
                gid = f"{prefix}g{g}"
                vertices = [BondId(0, f"{gid}v{j}") for j in range(size)]
                _put(levels, vertices)
                gb = BondId(1, gid)
                _put(levels, [gb])
                bmap[gb] = vertices
                group_bonds.append(gb)
            top = BondId(2, f"{prefix}top" if prefix else "top")
            bmap[top] = group_bonds
        else:
            tops = [block(order - 1, f"{prefix}b{g}.") for g in range(len(spec.group_sizes))]
            top = BondId(tops[0].level + 1, f"{prefix}top" if prefix else "top")
            bmap[top] = tops
        _put(levels, [top])
        return top

    block(spec.order, "")
    return new_hyperstructure(levels, bmap)


def _put(levels: list[list[BondId]], bonds: Sequence[BondId]) -> None:
    for b in bonds:
        while len(levels) <= b.level:
            levels.append([])
        levels[b.level].append(b)


# -- H-complexes -------------------------------------------------------------

Simplex = frozenset


@dataclass(frozen=True)
class HComplex:
    """Simplices with an explicit family of declared sub-simplices each.

    Unlike a simplicial complex, the family need not be closed under taking
    subsets.  Singletons ``{v}`` stand for the vertex ``v`` itself.
    """

    vertices: frozenset[str]
    simplices: frozenset[Simplex]
    subface: Mapping[Simplex, frozenset[Simplex]] = field(default_factory=dict)

    __hash__ = None

    @classmethod
    def build(
        cls,
        vertices: Iterable[str],
        simplices: Iterable[Iterable[str]],
        subface: Mapping[Iterable[str], Iterable[Iterable[str]]] | None = None,
    ) -> HComplex:
        fam = frozenset(frozenset(s) for s in simplices)
        sub = {frozenset(k): frozenset(frozenset(s) for s in v) for k, v in (subface or {}).items()}
        return cls(frozenset(vertices), fam, sub)

    @classmethod
    def full(cls, vertices: Iterable[str]) -> HComplex:
        """The ordinary simplicial complex of all nonempty subsets, facets declared."""
        vs = sorted(vertices)
        fam = [frozenset(c) for k in range(1, len(vs) + 1) for c in combinations(vs, k)]
        sub = {s: frozenset(s - {v} for v in s) for s in fam if len(s) >= 2}
        return cls(frozenset(vs), frozenset(fam), sub)

    def declared(self, s: Simplex) -> frozenset[Simplex]:
        return self.subface.get(s, frozenset())


def _label(s: Simplex) -> str:
    return "{" + ",".join(sorted(s)) + "}"


def validate_h_complex(c: HComplex) -> ValidationReport:
    """Subface containment is a rule; missing facets are only noted."""
    report = ValidationReport()
    for s in sorted(c.simplices, key=lambda s: (len(s), sorted(s))):
        if not s:
            report.violations.append(Violation("EmptySimplex", None, "the empty set is not a simplex"))
            continue
        stray = s - c.vertices
        if stray:
            report.violations.append(
                Violation("UnknownVertex", None, f"{_label(s)} uses unknown vertices {sorted(stray)}")
            )
    for s in sorted(c.subface, key=lambda s: (len(s), sorted(s))):
        if s not in c.simplices:
            report.violations.append(Violation("UndeclaredSimplex", None, f"{_label(s)} is not a simplex"))
        for f in sorted(c.subface[s], key=lambda f: (len(f), sorted(f))):
            if not f < s:
                report.violations.append(
                    Violation("NotASubset", None, f"{_label(f)} is not a proper subset of {_label(s)}")
                )
            elif f not in c.simplices and len(f) > 1:
                report.violations.append(
                    Violation("UndeclaredSubface", None, f"{_label(f)} under {_label(s)} is not a simplex")
                )
    for s in sorted(c.simplices, key=lambda s: (len(s), sorted(s))):
        if len(s) < 3:
            continue
        for v in sorted(s):
            facet = s - {v}
            if facet not in c.simplices:
                report.warnings.append(
                    Violation("ClosureIncomplete", None, f"facet {_label(facet)} of {_label(s)} is absent")
                )
    return report


def _restricted_has_multi(c: HComplex, removed: str) -> bool:
    return any(len(s) >= 2 and removed not in s for s in c.simplices)


def is_brunnian_complex(c: HComplex, per_level: bool = False) -> bool:
    """Brunnian test for a whole complex.

    By default: deleting any one vertex must leave no simplex with two or more
    vertices anywhere in the complex.  With ``per_level`` each simplex is
    checked against the simplices of its own level only (as in
    :func:`is_brunnian_bond`), which is how grouped constructions such as
    type ``(3, 3)`` qualify.
    """
    report = validate_h_complex(c)
    if not report.ok:
        raise InvalidComplex(report)
    if per_level:
        h = h_complex_to_hyperstructure(c)
        return all(
            is_brunnian_bond(h, b) for b in h.bonds() if b.level >= 1 and len(h.boundary[b]) >= 2
        )
    return all(not _restricted_has_multi(c, v) for v in c.vertices)


def _parts(c: HComplex, s: Simplex) -> frozenset[Simplex]:
    """Declared subfaces, or the vertices themselves when none are declared."""
    parts = c.declared(s)
    return parts if parts else frozenset(frozenset([v]) for v in s)


def h_complex_to_hyperstructure(c: HComplex) -> Hyperstructure:
    """Simplices become bonds of their declared subfaces.

    A simplex sits one level above its deepest subface.  Shallower subfaces
    are lifted through singleton carrier bonds (ids ending ``^level``) so that
    every boundary points exactly one level down.
    """
    report = validate_h_complex(c)
    if not report.ok:
        raise InvalidComplex(report)

    depth: dict[Simplex, int] = {}
    visiting: set[Simplex] = set()

    def depth_of(s: Simplex) -> int:
        if len(s) == 1:
            return 0
        if s in depth:
            return depth[s]
        if s in visiting:
            raise CyclicSubfaces(f"subface cycle through {_label(s)}")
        visiting.add(s)
        d = 1 + max(depth_of(f) for f in _parts(c, s))
        visiting.discard(s)
        depth[s] = d
        return d

    multi = sorted((s for s in c.simplices if len(s) >= 2), key=lambda s: (len(s), sorted(s)))
    for s in multi:
        depth_of(s)

    levels: list[set[BondId]] = [{BondId(0, v) for v in c.vertices}]
    bmap: dict[BondId, set[BondId]] = {}

    def place(b: BondId) -> None:
        while len(levels) <= b.level:
            levels.append(set())
        levels[b.level].add(b)

    def node(f: Simplex) -> BondId:
        if len(f) == 1:
            return BondId(0, next(iter(f)))
        return BondId(depth[f], _label(f))

    def lifted(f: Simplex, level: int) -> BondId:
        b = node(f)
        while b.level < level:
            up = BondId(b.level + 1, f"{_label(f)}^{b.level + 1}")
            place(up)
            bmap[up] = {b}
            b = up
        return b

    for s in multi:
        b = node(s)
        place(b)
        bmap[b] = {lifted(f, b.level - 1) for f in _parts(c, s)}
    return new_hyperstructure(levels, bmap)


def brunnian_complex(spec: BrunnianSpec) -> HComplex:
    """The order-1 grouped complex as an H-complex: groups plus the full vertex set."""
    if spec.order != 1:
        raise ValueError("only order-1 specs have a direct H-complex form")
    vertices = []
    groups = []
    for g, size in enumerate(spec.group_sizes):
        members = [f"g{g}v{j}" for j in range(size)]
        vertices += members
        groups.append(frozenset(members))
    whole = frozenset(vertices)
    subface = {whole: frozenset(groups)} if len(groups) > 1 or groups[0] != whole else {}
    return HComplex(frozenset(vertices), frozenset(groups) | {whole}, subface)


def removal_report(h: Hyperstructure, vertex) -> dict:
    """What survives deleting one vertex and everything that depends on it."""
    v = _as_bond(vertex, 0)
    after = delete(h, v, cascade=True)
    destroyed = sorted(b for b in h.bonds() if b not in after)
    return {"vertex": v, "destroyed": destroyed, "remaining": after}
