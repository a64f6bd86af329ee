from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from ripsmachine.corpus import golden_iet, golden_lengths, random_system, shift_example
from ripsmachine.errors import BudgetExhausted, PreconditionError, WordError
from ripsmachine.forest import Edge, Forest
from ripsmachine.graph import morphism_index_check
from ripsmachine.isometry import build_isometry
from ripsmachine.scalar import Field
from ripsmachine.system import (System, cayley_quotient_morphism, cayley_view, independence_certificate,
                                parse_word, reduce_word, render_word, trajectory_tree)

Q = Field(0)


def test_word_parsing_and_reduction():
    w = parse_word("a.b^-1.b.c")
    assert w == (("a", 1), ("b", -1), ("b", 1), ("c", 1))
    assert render_word(reduce_word(w)) == "a.c"
    assert parse_word("1") == () and render_word(()) == "1"
    with pytest.raises(WordError):
        parse_word("a.^b")


def test_empty_word_is_identity_of_component():
    s = shift_example()
    p = s.forest.edge_point("I", 1)
    assert s.word_domain("1", base=p) == s.components[0]
    assert s.word_domain(()) == s.components
    with pytest.raises(WordError):
        s.word_isometry("1")


def test_word_domains():
    g = golden_iet()
    assert g.word_domain("a_1") == g.generator("a_1").domain
    s = shift_example()
    f = s.forest
    assert s.word_domain("a.a") == f.arc(f.vertex_point("0"), f.edge_point("I", 1))
    assert s.word_domain("a.a.a.a") is None
    r, changed = s.normalize("a.a^-1.a")
    assert r == (("a", 1),) and changed
    with pytest.raises(WordError):
        s.word_domain("a.a^-1", strict=True)
    with pytest.raises(WordError):
        s.word_domain("b")


def test_certificate_identity_generator_never_shrinks():
    f = Forest([(["0", "1"], [Edge("I", "0", "1", Q(1))])], Q)
    b = build_isometry(f, "b", [(f.vertex_point("0"), f.vertex_point("0")), (f.vertex_point("1"), f.vertex_point("1"))])
    rep = independence_certificate(System(f, (b,)), 6)
    assert rep.profile == [Q.one] * 6
    assert not rep.certified and not rep.passes and rep.refuted
    assert render_word(rep.witness) == "b.b.b.b.b.b"


def test_certificate_early_decrease_does_not_pass_a_loop():
    # the diameter drops from 2 to 1, but b.b.b... keeps the arc [2,3] forever
    f = Forest([(["0", "3"], [Edge("I", "0", "3", Q(3))])], Q)
    P = lambda t: f.edge_point("I", Q(t))  # noqa: E731
    a = build_isometry(f, "a", [(P(0), P(1)), (P(2), P(3))])
    b = build_isometry(f, "b", [(P(2), P(2)), (P(3), P(3))])
    rep = independence_certificate(System(f, (a, b)), 2)
    assert rep.profile == [Q(2), Q(1)]
    assert rep.refuted and not rep.passes
    assert rep.to_json()["refuted"] is True


def test_certificate_golden_depth_one():
    rep = independence_certificate(golden_iet(), 1)
    assert rep.max_diameter == golden_lengths()[0]
    assert rep.word_counts == [4]


def test_certificate_vacuous_when_words_die_out():
    rep = independence_certificate(shift_example(), 5)
    assert rep.max_diameter == 0 and rep.witness == () and rep.certified
    assert rep.word_counts == [2, 2, 2, 0, 0]


def test_certificate_budget():
    with pytest.raises(BudgetExhausted):
        independence_certificate(golden_iet(), 30, budget=10)
    with pytest.raises(ValueError):
        independence_certificate(golden_iet(), 0)


def test_certificate_golden_shrinks():
    rep = independence_certificate(golden_iet(), 20)
    assert rep.passes and not rep.certified and not rep.refuted
    assert all(b <= a for a, b in zip(rep.profile, rep.profile[1:]))


def test_trajectory_tree_of_a_point_in_no_domain():
    f = Forest([(["0", "1"], [Edge("I", "0", "1", Q(1))]), (["p"], [])], Q)
    a = build_isometry(f, "a", [(f.vertex_point("0"), f.vertex_point("0")), (f.vertex_point("1"), f.vertex_point("1"))])
    tv = trajectory_tree(System(f, (a,)), f.vertex_point("p"), 5)
    assert list(tv.points) == [()] and not tv.edges


def test_trajectory_tree_of_shift_at_zero():
    s = shift_example()
    tv = trajectory_tree(s, s.forest.vertex_point("0"), 3)
    assert [render_word(w) for w in tv.points] == ["1", "a", "a.a", "a.a.a"]
    assert tv.points[(("a", 1),) * 3] == s.forest.vertex_point("3")
    assert not tv.truncated


def test_cayley_view_of_golden_iet_is_a_line():
    s = golden_iet()
    p = s.forest.edge_point("I", Field(5).parse("1/3"))
    cv = cayley_view(s, p, 10)
    assert all(v <= 2 for v in cv.core.valences().values())
    assert cv.index == 0
    assert len(cv.open_vertices) == 2
    tv = trajectory_tree(s, p, 10)
    tau = cayley_quotient_morphism(tv, cv)
    tau.check()
    # orbits of a minimal rotation have no repetitions: the quotient is an isomorphism
    assert morphism_index_check(tau)[0]


def test_duplicate_generator_names_rejected():
    f = Forest([(["0", "1"], [Edge("I", "0", "1", Q(1))])], Q)
    a = build_isometry(f, "a", [(f.vertex_point("0"), f.vertex_point("0"))])
    with pytest.raises(PreconditionError):
        System(f, (a, a))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_certificate_counts_match_brute_force(seed):
    s = random_system(random.Random(seed), max_edges=4, max_gens=3)
    depth = 4
    rep = independence_certificate(s, depth)
    words = [((z,)) for z in s.letters]
    for k in range(1, depth + 1):
        if k > 1:
            words = [w + (z,) for w in words for z in s.letters if z != (w[-1][0], -w[-1][1])]
        alive = [(w, s.word_domain(w)) for w in words]
        alive = [(w, d) for w, d in alive if d is not None]
        words = [w for w, _ in alive]
        assert rep.word_counts[k - 1] == len(alive)
        best = max((s.forest.diameter(d) for _, d in alive), default=Q.zero)
        assert rep.profile[k - 1] == best
