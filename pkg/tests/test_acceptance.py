"""End-to-end acceptance checks, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
happen; they are also repeated in the terminal summary.
"""
import itertools
import math
import random
from collections import Counter

import networkx as nx
import numpy as np

from gen import (
    as_digraph,
    brunnian_removal_oracle,
    minimax_partition,
    random_dissimilarity,
    random_structure,
)
from hyperstruct import (
    BondId,
    BrunnianSpec,
    ClusterLadder,
    ConeSpec,
    GlobalizerSpec,
    ParametrizedFamily,
    PropertyAssignment,
    StackMove,
    StackPlan,
    build_brunnian,
    check_gluing,
    cluster_hyperstructure,
    cone_hyperstructure,
    decode,
    encode,
    from_layers,
    globalize,
    is_brunnian_bond,
    minimal_flip,
    stack,
    support,
    sweep,
    validate,
)
from hyperstruct.core import delete, signature
from hyperstruct.globalizer import top_value


def test_two_level_six_object_structure(criterion):
    with criterion("six objects, two 1-bonds, one 2-bond: build, validate, JSON round trip"):
        objs = [f"o{i}" for i in range(1, 7)]
        h = from_layers(objs, {"u": objs[:3], "v": objs[3:]}, {"w": ["u", "v"]})
        assert validate(h).ok
        assert decode(encode(h)).structure == h
        assert h.height == 2
        assert len(support(h, BondId(2, "w"))) == 6


def test_cones_on_four_points(criterion):
    with criterion("cones: C(4,3)=4 level-1 bonds with value 3, top value 4"):
        h, props = cone_hyperstructure(["p1", "p2", "p3", "p4"], ConeSpec((3, 4)))
        assert len(h.levels[1]) == math.comb(4, 3) == 4
        assert all(props[1][b] == 3 for b in h.level(1))
        assert len(h.levels[2]) == 1 and props[2][h.level(2)[0]] == 4


def test_grouped_brunnian_nine_vertices(criterion):
    with criterion("Brunnian type (3,3): 9 vertices, all bonds Brunnian, all 9 deletions"):
        h = build_brunnian(BrunnianSpec.of_type(3, 3))
        assert len(h.levels[0]) == 9
        for b in h.bonds():
            if b.level >= 1:
                assert is_brunnian_bond(h, b) and brunnian_removal_oracle(h, b)
        graph = as_digraph(h)
        top = BondId(2, "top")
        for v in h.level(0):
            after = delete(h, v, cascade=True)
            group = next(g for g in h.level(1) if v in h.boundary[g])
            # brute force: a bond dies iff it can reach v
            oracle = {b for b in h.bonds() if b == v or nx.has_path(graph, b, v)}
            assert set(h.bonds()) - set(after.bonds()) == oracle == {v, group, top}


def test_brunnian_oracle_equivalence(criterion):
    with criterion("is_brunnian_bond agrees with removal oracle on 200 random structures"):
        rng = random.Random(2024)
        checked = 0
        for _ in range(200):
            h = random_structure(rng, max_levels=3, max_bonds=30)
            assert len(h) <= 30 and h.height <= 2
            for b in h.bonds():
                if b.level >= 1 and len(h.boundary[b]) >= 2:
                    assert is_brunnian_bond(h, b) == brunnian_removal_oracle(h, b)
                    checked += 1
        assert checked > 0


def _election_oracle(votes):
    groups = [Counter(votes[i:i + 3]).most_common(1)[0][0] for i in (0, 3, 6)]
    return Counter(groups).most_common(1)[0][0]


def test_democracy_minimal_flip(criterion):
    with criterion("democracy: winner B, minimal flip to A has size exactly 2"):
        voters = [f"v{i}" for i in range(1, 10)]
        votes = "AAB" "BBA" "ABB"
        h = from_layers(voters, {"g1": voters[:3], "g2": voters[3:6], "g3": voters[6:]},
                        {"top": ["g1", "g2", "g3"]})
        omega0 = PropertyAssignment(0, {BondId(0, v): x for v, x in zip(voters, votes)})
        spec = GlobalizerSpec.uniform("vote", 2)
        assert top_value(h, omega0, spec) == "B" == _election_oracle(votes)
        changes = minimal_flip(h, omega0, spec, "A", budget=3)
        # exhaustive search over every size-1 change set
        size_one_wins = []
        for i in range(9):
            flipped = list(votes)
            flipped[i] = "A" if flipped[i] == "B" else "B"
            if _election_oracle("".join(flipped)) == "A":
                size_one_wins.append(voters[i])
        assert len(changes) == 2, (
            f"minimal change set has size {len(changes)}: {changes}; "
            f"size-1 sets reaching A: {size_one_wins}"
        )
        assert not size_one_wins


def _tampered(value):
    return value + 1 if isinstance(value, (int, float)) else value + "x"


def test_globalize_gluing_round_trip(criterion):
    with criterion("globalize/check_gluing round trip on 100 structures, every tamper detected"):
        rng = random.Random(77)
        tampers = 0
        for _ in range(100):
            h = random_structure(rng, max_levels=4, max_bonds=30)
            kinds = [rng.choice(["sum", "max", "vote"]) for _ in range(h.height)]
            spec = GlobalizerSpec.from_kinds(kinds)
            omega0 = PropertyAssignment(0, {b: rng.randint(0, 5) for b in h.level(0)})
            levels = [omega0] + globalize(h, omega0, spec)
            assert check_gluing(h, levels, spec).ok
            for i in range(1, h.height + 1):
                for b in h.level(i):
                    bad = [PropertyAssignment(a.level, dict(a.values)) for a in levels]
                    bad[i].values[b] = _tampered(bad[i].values[b])
                    report = check_gluing(h, bad, spec)
                    assert not report.ok and b in report.bonds()
                    tampers += 1
        assert tampers > 0


def _partition(h, level, ids):
    index = {BondId(0, p): i for i, p in enumerate(ids)}
    return {frozenset(index[x] for x in support(h, b)) for b in h.level(level)}


def test_single_linkage_oracle(criterion):
    with criterion("clustering matches O(n^3) single linkage on 50 matrices, coarsens monotonically"):
        rng = np.random.default_rng(50)
        for trial in range(50):
            n = int(rng.integers(1, 13))
            d = random_dissimilarity(rng, n, integer=trial % 2 == 0)
            thresholds = tuple(sorted(set(np.round(rng.random(5) * 20, 3))))
            ladder = ClusterLadder(d, thresholds)
            h = cluster_hyperstructure(ladder)
            ids = ladder.point_ids()
            previous = {frozenset([i]) for i in range(n)}
            for level, t in enumerate(thresholds, start=1):
                current = _partition(h, level, ids)
                assert current == minimax_partition(d, t)
                # every block of the previous level lies inside one block here
                assert all(sum(1 for c in current if p <= c) == 1 for p in previous)
                previous = current


def _resampled(family):
    intervals = sweep(family)
    for t in family.parameter_grid:
        built = family.builder(t)
        present = {signature(built, b) for b in built.bonds()}
        assert {iv.signature for iv in intervals if iv.alive_at(t)} == present
    return intervals


def test_persistence_consistency(criterion):
    with criterion("persistence: resampled intervals reproduce builds; monotone families give one open interval"):
        pos = [0, 1, 10, 11]
        line = np.abs(np.subtract.outer(pos, pos)).astype(float)
        family = ParametrizedFamily((0.5, 2, 20), lambda t: cluster_hyperstructure(ClusterLadder(line, (t,))))
        intervals = _resampled(family)
        by_sig = {(iv.level, iv.support): (iv.birth, iv.death) for iv in intervals}
        assert by_sig[(1, ("p0", "p1"))] == (2, 20)
        assert by_sig[(1, ("p0", "p1", "p2", "p3"))] == (20, None)

        rng = random.Random(8)
        for _ in range(20):
            d = random_dissimilarity(np.random.default_rng(rng.randrange(2**32)), rng.randint(2, 12))
            grid = tuple(sorted(rng.sample(range(25), 6)))

            def grow(t, d=d, grid=grid):
                return cluster_hyperstructure(ClusterLadder(d, tuple(g for g in grid if g <= t)))

            intervals = _resampled(ParametrizedFamily(grid, grow))
            sigs = [iv.signature for iv in intervals]
            assert len(sigs) == len(set(sigs))
            assert all(iv.death is None for iv in intervals)


def test_stacking_bookkeeping(criterion):
    with criterion("stacking: segment, rectangle, box gives dims 1,2,3; one more move gives 4; leaves = product"):
        shapes = {"segment": 1}
        moves = (StackMove(2, "rectangle"), StackMove(3, "box"))
        result = stack(StackPlan(shapes, "segment", moves))
        assert result.virtual_dims == [1, 2, 3]
        longer = stack(StackPlan(shapes, "segment", moves + (StackMove(4, "beyond"),)))
        assert longer.virtual_dims == [1, 2, 3, 4]
        for arities in itertools.product([2, 3], repeat=3):
            r = stack(StackPlan(shapes, "segment", tuple(StackMove(a, "m") for a in arities)))
            assert len(r.structure.levels[0]) == math.prod(arities)


def test_serialization_identity(criterion):
    with criterion("decode(encode(h)) == h on 500 structures, encoding byte-stable"):
        rng = random.Random(500)
        for _ in range(500):
            h = random_structure(rng, max_levels=5, max_bonds=40, dims=rng.random() < 0.5)
            first = encode(h)
            assert decode(first).structure == h
            assert encode(decode(first).structure) == first == encode(h)
