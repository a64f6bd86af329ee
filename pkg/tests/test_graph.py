from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_components, brute_core
from ripsmachine.analysis import iet_to_system
from ripsmachine.corpus import golden_iet
from ripsmachine.errors import MorphismError
from ripsmachine.forest import Edge, Forest
from ripsmachine.graph import GraphMorphism, MultiGraph, morphism_index_check
from ripsmachine.isometry import build_isometry
from ripsmachine.scalar import Field
from ripsmachine.system import System

Q = Field(0)


def path3():
    return MultiGraph.build(["u", "v", "w"], [("e", "u", "v"), ("f", "v", "w")])


def circle(n=3):
    vs = [f"c{i}" for i in range(n)]
    return MultiGraph.build(vs, [(f"k{i}", vs[i], vs[(i + 1) % n]) for i in range(n)])


def test_associated_graph_of_iet():
    g = iet_to_system([1, 2, 3], [3, 1, 2]).associated_graph()
    assert len(g.vertices) == 1 and len(g.edges) == 3
    assert all(e.src == e.dst for e in g.edges.values())


def test_associated_graph_small_cases():
    f = Forest([(["a", "b"], [Edge("e", "a", "b", Q(1))]), (["c", "d"], [Edge("g", "c", "d", Q(1))])], Q)
    assert System(f, ()).associated_graph().summary() == {"vertices": 2, "edges": 0, "index": 0}
    t = build_isometry(f, "t", [(f.vertex_point("a"), f.vertex_point("c"))])
    g = System(f, (t,)).associated_graph()
    assert g.summary()["vertices"] == 2 and g.summary()["edges"] == 1


def test_cores():
    assert not path3().core().vertices
    c = circle()
    assert set(c.core().vertices) == set(c.vertices)
    c.vertices["p"] = None
    c.add_edge("pend", "c0", "p")
    core = c.core()
    assert "p" not in core.vertices and "pend" not in core.edges and len(core.edges) == 3


def test_index_of_graph_with_vertex_indices_2_0_1_minus1():
    # valences 4, 2, 3, 1
    g = MultiGraph.build(["A", "B", "C", "D"], [("l", "A", "A"), ("ab", "A", "B"), ("bc", "B", "C"),
                                                ("ca", "C", "A"), ("cd", "C", "D")])
    assert sorted(g.vertex_indices().values()) == [-1, 0, 1, 2]
    assert g.index() == 2 == g.core_index()


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_rose(n):
    g = MultiGraph.build(["o"], [(i, "o", "o") for i in range(n)])
    assert g.index() == 2 * n - 2


def test_tree_has_index_zero():
    assert path3().index() == 0


def test_morphisms():
    g = circle()
    sub = g.subgraph({"c0", "c1"}, {"k0"})
    inc = GraphMorphism(sub, g, {v: v for v in sub.vertices}, {e: e for e in sub.edges})
    inj, i_src, i_tgt = morphism_index_check(inc)
    assert inj and i_src <= i_tgt
    assert morphism_index_check(GraphMorphism.identity(g)) == (True, g.index(), g.index())
    two = MultiGraph.build(["x", "y"], [("p", "x", "y"), ("q", "x", "y")])
    one = MultiGraph.build(["x", "y"], [("r", "x", "y")])
    fold = GraphMorphism(two, one, {"x": "x", "y": "y"}, {"p": "r", "q": "r"})
    assert morphism_index_check(fold)[0] is False
    with pytest.raises(MorphismError):
        GraphMorphism(two, one, {"x": "y", "y": "x"}, {"p": "r", "q": "r"}).check()


def test_dot_is_deterministic():
    g = golden_iet().associated_graph()
    assert g.to_dot() == g.to_dot()
    assert g.to_dot().startswith('digraph "G" {')


def random_multigraph(rng, max_edges=8):
    nv = rng.randint(1, 6)
    vs = [f"v{i}" for i in range(nv)]
    edges = {f"e{i}": (rng.choice(vs), rng.choice(vs)) for i in range(rng.randint(0, max_edges))}
    return vs, edges


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_core_and_index_against_brute_force(seed):
    vs, edges = random_multigraph(random.Random(seed))
    g = MultiGraph.build(vs, [(k, s, t) for k, (s, t) in edges.items()])
    cv, ce = brute_core(vs, edges)
    core = g.core()
    assert set(core.vertices) == cv and set(core.edges) == ce
    expect = sum(max(0, 2 * (ne - len(cvs))) for cvs, ne in brute_components(vs, edges))
    assert g.index() == expect == g.core_index()
