import random

import networkx as nx
import pytest

from gen import as_digraph, brunnian_removal_oracle, random_structure
from hyperstruct import (
    BondId,
    BrunnianSpec,
    HComplex,
    build_brunnian,
    from_layers,
    h_complex_to_hyperstructure,
    is_brunnian_bond,
    is_brunnian_complex,
    validate,
    validate_h_complex,
)
from hyperstruct.brunnian import brunnian_complex, removal_report
from hyperstruct.core import delete
from hyperstruct.errors import DegenerateBond, InvalidComplex

O = [f"o{i}" for i in range(1, 7)]


def leveled(h) -> nx.DiGraph:
    g = as_digraph(h)
    nx.set_node_attributes(g, {b: b.level for b in g.nodes}, "level")
    return g


def same_shape(h1, h2) -> bool:
    return nx.is_isomorphic(leveled(h1), leveled(h2), node_match=lambda a, b: a["level"] == b["level"])


class TestBond:
    def test_figure_one_top(self):
        h = from_layers(O, {"u": O[:3], "v": O[3:]}, {"w": ["u", "v"]})
        assert is_brunnian_bond(h, BondId(2, "w"))
        assert is_brunnian_bond(h, BondId(1, "u"))

    def test_residual_pair_survives(self):
        h = from_layers(["u", "v", "z"], {"big": ["u", "v", "z"], "pair": ["u", "v"]})
        assert not is_brunnian_bond(h, BondId(1, "big"))
        assert is_brunnian_bond(h, BondId(1, "pair"))

    def test_equal_boundary_is_not_residual(self):
        h = from_layers(["u", "v"], {"a": ["u", "v"], "b": ["u", "v"]})
        assert is_brunnian_bond(h, BondId(1, "a"))

    def test_degenerate(self):
        h = from_layers(["u"], {"x": ["u"]})
        with pytest.raises(DegenerateBond):
            is_brunnian_bond(h, BondId(1, "x"))

    def test_oracle_agreement(self):
        rng = random.Random(21)
        seen = {True: 0, False: 0}
        for _ in range(300):
            h = random_structure(rng, max_levels=3, max_bonds=30)
            for b in h.bonds():
                if b.level >= 1 and len(h.boundary[b]) >= 2:
                    verdict = is_brunnian_bond(h, b)
                    assert verdict == brunnian_removal_oracle(h, b)
                    seen[verdict] += 1
        assert seen[True] and seen[False]


class TestComplex:
    def test_whole_set_only(self):
        vs = [f"x{i}" for i in range(9)]
        assert is_brunnian_complex(HComplex.build(vs, [vs]))

    def test_full_triangle(self):
        assert not is_brunnian_complex(HComplex.full("abc"))

    def test_grouped(self):
        c = brunnian_complex(BrunnianSpec.of_type(3, 3))
        assert not is_brunnian_complex(c)
        assert is_brunnian_complex(c, per_level=True)

    def test_invalid(self):
        c = HComplex.build("abc", ["abc"], {"abc": ["ad"]})
        with pytest.raises(InvalidComplex):
            is_brunnian_complex(c)


class TestBuild:
    def test_three_three(self):
        h = build_brunnian(BrunnianSpec.of_type(3, 3))
        assert [len(lv) for lv in h.levels] == [9, 3, 1]
        for g in h.level(1):
            assert len(h.boundary[g]) == 3
        assert h.boundary[BondId(2, "top")] == frozenset(h.level(1))
        assert all(is_brunnian_bond(h, b) for b in h.bonds() if b.level >= 1)

    def test_single_pair(self):
        h = build_brunnian(BrunnianSpec.of_type(2))
        assert [len(lv) for lv in h.levels] == [2, 1, 1]
        assert [w.rule for w in validate(h).warnings] == ["DegenerateBond"]

    def test_order_two(self):
        h = build_brunnian(BrunnianSpec.of_type(3, 3, order=2))
        assert len(h.levels[0]) == 27 and h.height == 3
        top = h.top()[0]
        for v in h.level(0):
            after = delete(h, v, cascade=True)
            assert top not in after
            # the chain above v is gone, and only that chain
            chain = {v} | nx.ancestors(as_digraph(h), v)
            assert set(h.bonds()) - set(after.bonds()) == chain
            assert len(chain) == 4

    def test_explicit_sizes(self):
        h = build_brunnian(BrunnianSpec((2, 4, 3)))
        assert len(h.levels[0]) == 9
        assert sorted(len(h.boundary[g]) for g in h.level(1)) == [2, 3, 4]

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            BrunnianSpec((1, 3))
        with pytest.raises(ValueError):
            BrunnianSpec((3,), order=0)
        assert BrunnianSpec.of_type(3, 3, order=2).vertex_count == 27

    def test_exhaustive_invariant(self):
        for groups in range(1, 5):
            for size in range(2, 5):
                for order in (1, 2):
                    spec = BrunnianSpec.of_type(groups, size, order=order) if groups > 1 else BrunnianSpec((size,), order)
                    h = build_brunnian(spec)
                    assert validate(h).ok
                    assert len(h.levels[0]) == spec.vertex_count
                    for b in h.bonds():
                        if b.level >= 1 and len(h.boundary[b]) >= 2:
                            assert is_brunnian_bond(h, b)
                            assert brunnian_removal_oracle(h, b)

    def test_vertex_deletion(self):
        h = build_brunnian(BrunnianSpec.of_type(3, 3))
        for v in h.level(0):
            report = removal_report(h, v)
            group = next(g for g in h.level(1) if v in h.boundary[g])
            assert report["destroyed"] == sorted([v, group, BondId(2, "top")])
            rest = report["remaining"]
            # nothing binds two or more survivors on the affected branch
            assert all(not (rest.boundary[b] & h.boundary[group]) for b in rest.level(1))
            assert len(rest.level(1)) == 2


class TestHComplex:
    def test_full_complex_is_closed(self):
        report = validate_h_complex(HComplex.full("abc"))
        assert report.ok and report.warnings == []

    def test_closure_incomplete(self):
        c = HComplex.build("abc", ["ab", "abc"], {"abc": ["ab", "c"]})
        report = validate_h_complex(c)
        assert report.ok
        noted = sorted(w.message for w in report.warnings)
        assert len(noted) == 2
        assert any("{a,c}" in m for m in noted) and any("{b,c}" in m for m in noted)

    def test_not_a_subset(self):
        c = HComplex.build("abcd", ["abc", "ad"], {"abc": ["ad"]})
        assert [v.rule for v in validate_h_complex(c).violations] == ["NotASubset"]

    def test_triangle_three_levels(self):
        h = h_complex_to_hyperstructure(HComplex.full("abc"))
        assert [len(lv) for lv in h.levels] == [3, 3, 1]

    def test_skip_to_vertices(self):
        h = h_complex_to_hyperstructure(HComplex.build("abc", ["abc"]))
        assert [len(lv) for lv in h.levels] == [3, 1]

    def test_mixed_depth_is_lifted(self):
        h = h_complex_to_hyperstructure(HComplex.build("abc", ["ab", "abc"], {"abc": ["ab", "c"]}))
        assert validate(h).ok and h.height == 2
        assert BondId(1, "{c}^1") in h

    def test_grouped_matches_builder(self):
        spec = BrunnianSpec.of_type(3, 3)
        assert same_shape(h_complex_to_hyperstructure(brunnian_complex(spec)), build_brunnian(spec))
