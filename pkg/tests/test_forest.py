from __future__ import annotations

import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from oracles import GridForest, grid_unit
from ripsmachine.corpus import random_forest
from ripsmachine.errors import ForestError, NoPathError
from ripsmachine.forest import Edge, Forest, Subtree
from ripsmachine.scalar import Field

Q = Field(0)


def interval(length=3):
    return Forest([(["a", "b"], [Edge("I", "a", "b", Q(length))])], Q)


def tripod(l1=1, l2=1, l3=1):
    return Forest([(["c", "x", "y", "z"], [Edge("cx", "c", "x", Q(l1)), Edge("cy", "c", "y", Q(l2)),
                                           Edge("cz", "c", "z", Q(l3))])], Q)


def test_same_edge_distance():
    f = interval()
    assert f.distance(f.edge_point("I", 1), f.edge_point("I", Q.parse("5/2"))) == Q.parse("3/2")
    p = f.edge_point("I", 1)
    assert f.distance(p, p) == 0


def test_tripod_leaf_distance():
    f = tripod()
    assert f.distance(f.vertex_point("x"), f.vertex_point("y")) == 2


def test_edge_end_offsets_become_vertices():
    f = interval()
    assert f.edge_point("I", 0) == f.vertex_point("a")
    assert f.edge_point("I", 3) == f.vertex_point("b")
    with pytest.raises(ForestError):
        f.edge_point("I", 4)


def test_hull_examples():
    f = tripod()
    p = f.edge_point("cx", Q.parse("1/2"))
    assert f.hull([p, p]).gens == (p,)
    e = f.hull([f.vertex_point("c"), f.vertex_point("x")])
    assert set(e.gens) == {f.vertex_point("c"), f.vertex_point("x")}
    k = f.hull([f.vertex_point("x"), f.vertex_point("y")])
    assert set(k.gens) == {f.vertex_point("x"), f.vertex_point("y")}
    assert f.contains(k, f.vertex_point("c"))
    assert not f.contains(k, f.vertex_point("z"))


def test_extremal_points():
    f = interval()
    pts = [f.edge_point("I", t) for t in (1, 2, Q.parse("5/2"))]
    assert set(f.hull(pts).gens) == {pts[0], pts[2]}
    g = tripod()
    leaves = [g.vertex_point(v) for v in "xyz"]
    assert set(g.hull(leaves).gens) == set(leaves)


def test_intersection_examples():
    f = interval()
    k1 = f.arc(f.vertex_point("a"), f.edge_point("I", 2))
    k2 = f.arc(f.edge_point("I", 1), f.vertex_point("b"))
    assert f.intersect(k1, k2) == f.arc(f.edge_point("I", 1), f.edge_point("I", 2))
    assert f.intersect(k1, k1) == k1
    g = tripod()
    half = Q.parse("1/2")
    leg_x = g.arc(g.edge_point("cx", half), g.vertex_point("x"))
    leg_y = g.arc(g.edge_point("cy", half), g.vertex_point("y"))
    assert g.intersect(leg_x, leg_y) is None


def test_chop_examples():
    f = Forest([(["0", "1"], [Edge("I", "0", "1", Q(1))])], Q)
    (k,) = f.chop(Q.parse("1/4"))
    assert set(k.gens) == {f.edge_point("I", Q.parse("1/4")), f.edge_point("I", Q.parse("3/4"))}
    assert f.chop(2) == [None]
    g = tripod()
    (t,) = g.chop(Q.parse("1/4"))
    assert set(t.gens) == {g.edge_point(e, Q.parse("3/4")) for e in ("cx", "cy", "cz")}
    assert g.length(t) == Q.parse("9/4")


def test_diameter_examples():
    f = interval(5)
    assert f.diameter(f.hull([f.edge_point("I", 2)])) == 0
    assert f.diameter(f.tree_subtree(0)) == 5
    assert tripod(1, 2, 3).diameter(tripod(1, 2, 3).tree_subtree(0)) == 5


def test_no_path_between_trees():
    f = Forest([(["a"], []), (["b"], [])], Q)
    with pytest.raises(NoPathError):
        f.distance(f.vertex_point("a"), f.vertex_point("b"))
    with pytest.raises(ForestError):
        f.hull([f.vertex_point("a"), f.vertex_point("b")])


@pytest.mark.parametrize("trees,msg", [
    ([(["a", "b"], [Edge("e", "a", "b", Q(0))])], "edge length must be positive"),
    ([(["a", "b", "c"], [Edge("e", "a", "b", Q(1))])], "not a tree"),
    ([(["a", "b"], [Edge("e", "a", "a", Q(1))])], "loop"),
    ([(["a"], []), (["a"], [])], "duplicate vertex"),
])
def test_malformed_forests(trees, msg):
    with pytest.raises(ForestError, match=msg):
        Forest(trees, Q)


def test_bridge_and_cells():
    g = tripod()
    kx = g.hull([g.vertex_point("x")])
    ky = g.arc(g.edge_point("cy", Q.parse("1/2")), g.vertex_point("y"))
    p, q = g.bridge(kx, ky)
    assert (p, q) == (g.vertex_point("x"), g.edge_point("cy", Q.parse("1/2")))
    verts, cells = g.cells(0, [g.edge_point("cy", Q.parse("1/2"))])
    assert len(cells) == 4 and sum((c.length for c in cells), Q.zero) == 3


def test_extract_rebuilds_pieces():
    g = tripod()
    k = g.arc(g.edge_point("cx", Q.parse("1/2")), g.vertex_point("y"))
    new, to_new = g.extract([k])
    assert new.total_length() == Q.parse("3/2")
    a, b = to_new(g.edge_point("cx", Q.parse("1/2"))), to_new(g.vertex_point("y"))
    assert new.distance(a, b) == Q.parse("3/2")


# -- oracle comparisons on random forests ----------------------------------------------------

def _sample(rng, grid, n):
    nodes = grid.nodes
    return [rng.choice(nodes) for _ in range(n)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_geometry_against_grid_oracle(seed):
    rng = random.Random(seed)
    f = random_forest(rng, max_edges=6, max_trees=2)
    grid = GridForest(f, grid_unit(f, 2))
    unit = Q(grid.unit)
    for _ in range(6):
        a, b = _sample(rng, grid, 2)
        d = grid.dist(a, b)
        if d is None:
            with pytest.raises(NoPathError):
                f.distance(grid.point(a), grid.point(b))
        else:
            assert f.distance(grid.point(a), grid.point(b)) == unit * d
    tid = rng.randrange(f.n_trees)
    tree_nodes = [x for x in grid.nodes if f.tree_of(grid.point(x)) == tid]
    for _ in range(4):
        g1 = [rng.choice(tree_nodes) for _ in range(rng.randint(1, 3))]
        g2 = [rng.choice(tree_nodes) for _ in range(rng.randint(1, 3))]
        k1 = f.hull([grid.point(x) for x in g1])
        k2 = f.hull([grid.point(x) for x in g2])
        h1, h2 = grid.hull_nodes(g1), grid.hull_nodes(g2)
        for x in tree_nodes:
            assert f.contains(k1, grid.point(x)) == (x in h1)
        got = f.intersect(k1, k2)
        both = h1 & h2
        if got is None:
            assert not both
        else:
            # the intersection is a subtree whose extremal points lie on the grid
            assert {grid.node(p) for p in got.gens} <= both
            assert grid.hull_nodes([grid.node(p) for p in got.gens]) == both
        # diameter and length
        dia = max((grid.dist(x, y) for x, y in combinations(h1, 2)), default=0)
        assert f.diameter(k1) == unit * dia
        inner = sum(1 for x, y in combinations(h1, 2) if grid.dist(x, y) == 1)
        assert f.length(k1) == unit * inner
    # medians
    for _ in range(3):
        a, b, c = [rng.choice(tree_nodes) for _ in range(3)]
        m = f.median(grid.point(a), grid.point(b), grid.point(c))
        mn = grid.node(m)
        for u, v in ((a, b), (b, c), (a, c)):
            assert grid.dist(u, mn) + grid.dist(mn, v) == grid.dist(u, v)
