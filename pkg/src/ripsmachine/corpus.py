"""Curated example systems and seeded random instance generators."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .analysis import iet_to_system
from .forest import Edge, Forest, Point, Subtree
from .isometry import PartialIsometry, build_isometry
from .scalar import Field, Scalar
from .system import System

__all__ = [
    "golden_lengths", "golden_iet", "shift_example", "hole_rotation", "tripod_reduced", "pendant_reduced",
    "tripod_band",
    "random_rational", "random_quadratic", "irreducible", "random_iet", "random_forest",
    "random_system", "CutCover", "random_cut_cover",
]


# -- curated ---------------------------------------------------------------------------------

def golden_lengths(scale=1) -> tuple[Scalar, Scalar]:
    fld = Field(5)
    l1 = (fld.sqrt_d() - 1) / 2 * scale
    return l1, fld.one * scale - l1


def golden_iet() -> System:
    """Exchange of two intervals of lengths ``(sqrt5-1)/2`` and ``(3-sqrt5)/2``."""
    return iet_to_system(golden_lengths(), [2, 1], Field(5), name="golden-iet")


def shift_example() -> System:
    """``[0,3]`` with the translation ``x -> x+1`` from ``[0,2]`` to ``[1,3]``."""
    fld = Field(0)
    f = Forest([(["0", "3"], [Edge("I", "0", "3", fld(3))])], fld)
    a = build_isometry(f, "a", [(f.edge_point("I", 0), f.edge_point("I", 1)),
                                (f.edge_point("I", 2), f.vertex_point("3"))])
    return System(f, (a,), name="shift")


def hole_rotation(hole="1/1000", at="1/5") -> System:
    """Golden rotation of ``[0,1]`` with a gap of length ``hole`` cut out of one
    translation piece at ``at``.

    No point of the gap has a preimage, so every step erodes its orbit further;
    the total length drops by ``2*hole`` per step for a long time.
    """
    fld = Field(5)
    l1, l2 = golden_lengths()
    h, p = fld.parse(str(hole)), fld.parse(str(at))
    f = Forest([(["l", "r"], [Edge("I", "l", "r", fld.one)])], fld)
    P = lambda t: f.edge_point("I", t)  # noqa: E731
    gens = (build_isometry(f, "a", [(P(0), P(l2)), (P(p), P(l2 + p))]),
            build_isometry(f, "b", [(P(p + h), P(l2 + p + h)), (P(l1), P(1))]),
            build_isometry(f, "c", [(P(l1), P(0)), (P(1), P(l2))]))
    return System(f, gens, name="hole-rotation")


def tripod_reduced() -> System:
    """Reduced system on a forest with a branching tree.

    A golden rotation of ``I = [0,3]`` carries the dynamics; a tripod with legs of
    length 1 is mapped into ``I`` by five arc isometries.  Every extremal point of
    every domain lies in two domains, but two open arcs of the tripod are covered
    once, so the first step performs edge splits.  The generators are not
    independent (the certificate finds a recurring arc), so index results do not
    apply to it.
    """
    fld = Field(5)
    l1, l2 = golden_lengths(3)
    f = Forest([(["l", "r"], [Edge("I", "l", "r", fld(3))]),
                (["c", "x", "y", "z"], [Edge("cx", "c", "x", fld.one), Edge("cy", "c", "y", fld.one),
                                        Edge("cz", "c", "z", fld.one)])], fld)
    P = lambda t: f.edge_point("I", fld.parse(str(t)))  # noqa: E731
    V = f.vertex_point
    q = fld.parse("1/4")
    gens = [
        build_isometry(f, "a_1", [(P(0), P(l2)), (P(l1), P(3))]),
        build_isometry(f, "a_2", [(P(l1), P(0)), (P(3), P(l2))]),
        build_isometry(f, "b_1", [(V("x"), P("1/2")), (V("y"), P("5/2"))]),
        build_isometry(f, "b_2", [(V("c"), P("1/3")), (V("z"), P("4/3"))]),
        build_isometry(f, "b_3", [(V("x"), P("2")), (f.edge_point("cx", 1 - q), P("9/4"))]),
        build_isometry(f, "b_4", [(V("y"), P("1/5")), (f.edge_point("cy", 1 - q), P("9/20"))]),
        build_isometry(f, "b_5", [(V("z"), P("1")), (f.edge_point("cz", 1 - q), P("5/4"))]),
    ]
    return System(f, tuple(gens), name="tripod-reduced")


def pendant_reduced() -> System:
    """Reduced system with a pendant interval ``B = [0,3]`` mapped into a golden
    rotation of ``I = [0,3]``; the arcs ``(1/2,1)`` and ``(2,5/2)`` of ``B`` lie in
    one domain each.  Like :func:`tripod_reduced` its generators are not independent."""
    fld = Field(5)
    l1, l2 = golden_lengths(3)
    f = Forest([(["l", "r"], [Edge("I", "l", "r", fld(3))]), (["b0", "b3"], [Edge("B", "b0", "b3", fld(3))])], fld)
    P = lambda t: f.edge_point("I", fld.parse(str(t)))  # noqa: E731
    B = lambda t: f.edge_point("B", fld.parse(str(t)))  # noqa: E731
    gens = (
        build_isometry(f, "a_1", [(P(0), P(l2)), (P(l1), P(3))]),
        build_isometry(f, "a_2", [(P(l1), P(0)), (P(3), P(l2))]),
        build_isometry(f, "b_1", [(B(0), P("1/2")), (B(2), P("5/2"))]),
        build_isometry(f, "b_2", [(B(1), P("2")), (B(3), P("0"))]),
        build_isometry(f, "b_3", [(B(0), P("2")), (B("1/2"), P("5/2"))]),
        build_isometry(f, "b_4", [(B("5/2"), P("1/5")), (B(3), P("7/10"))]),
    )
    return System(f, gens, name="pendant-reduced")


def tripod_band() -> System:
    """Golden rotation of ``I = [0,3]`` with both bands rerouted through a tripod.

    ``c`` then ``d`` carry the first piece of the rotation across the arc ``x..y``;
    ``e`` then ``g`` carry a strip of width 1/2 of the second piece along the leg
    ``cz``.  Every point lies in exactly two domains away from five branch points,
    the generators are independent, and the machine halts at once with index 6.
    """
    fld = Field(5)
    l1, l2 = golden_lengths(3)
    w = fld.parse("1/2")
    f = Forest([(["l", "r"], [Edge("I", "l", "r", fld(3))]),
                (["c", "x", "y", "z"], [Edge("cx", "c", "x", l1 / 2), Edge("cy", "c", "y", l1 / 2),
                                        Edge("cz", "c", "z", w)])], fld)
    P = lambda t: f.edge_point("I", t)  # noqa: E731
    V = f.vertex_point
    gens = (build_isometry(f, "c", [(P(fld.zero), V("x")), (P(l1), V("y"))]),
            build_isometry(f, "d", [(V("x"), P(l2)), (V("y"), P(fld(3)))]),
            build_isometry(f, "e", [(P(l1), V("c")), (P(l1 + w), V("z"))]),
            build_isometry(f, "g", [(V("c"), P(fld.zero)), (V("z"), P(w))]),
            build_isometry(f, "a", [(P(l1 + w), P(w)), (P(fld(3)), P(l2))]))
    return System(f, gens, name="tripod-band")


# -- random scalars and interval exchanges ------------------------------------------------------

def random_rational(rng: random.Random, fld: Field, lo: int, hi: int, den: int = 8) -> Scalar:
    """Uniform on the grid ``(1/den) Z`` inside ``(lo, hi)``."""
    k = rng.randint(lo * den + 1, hi * den - 1)
    return fld(k) / den


def random_quadratic(rng: random.Random, fld: Field) -> Scalar:
    """A positive irrational ``(p + q sqrt d) / r`` with small coefficients."""
    while True:
        x = fld(rng.randint(-9, 9), rng.choice([-1, 1]) * rng.randint(1, 4)) / rng.randint(1, 9)
        if x.sign() > 0:
            return x


def irreducible(perm) -> bool:
    n = len(perm)
    return all(set(perm[:k]) != set(range(1, k + 1)) for k in range(1, n))


def random_iet(rng: random.Random, n: int, d: int = 5) -> tuple[list[Scalar], list[int]]:
    """Quadratic-irrational lengths and an irreducible permutation of ``1..n``."""
    fld = Field(d)
    if n < 2:
        raise ValueError("need at least two intervals")
    while True:
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        if irreducible(perm):
            break
    return [random_quadratic(rng, fld) for _ in range(n)], perm


# -- random forests and systems --------------------------------------------------------------

def random_forest(rng: random.Random, max_edges: int = 8, max_trees: int = 3, fld: Field | None = None,
                  den: int = 4) -> Forest:
    fld = fld or Field(0)
    n_edges = rng.randint(1, max_edges)
    n_trees = rng.randint(1, min(max_trees, n_edges))
    sizes = [1] * n_trees
    for _ in range(n_edges - n_trees):
        sizes[rng.randrange(n_trees)] += 1
    trees = []
    for t, m in enumerate(sizes):
        verts = [f"t{t}v0"]
        edges = []
        for j in range(1, m + 1):
            v = f"t{t}v{j}"
            u = rng.choice(verts)
            verts.append(v)
            edges.append(Edge(f"t{t}e{j}", u, v, random_rational(rng, fld, 0, 3, den)))
        trees.append((verts, edges))
    return Forest(trees, fld)


def _random_point(rng: random.Random, f: Forest, tid: int, den: int = 4) -> Point:
    verts = f.tree_vertices(tid)
    if rng.random() < 0.3 or len(verts) == 1:
        return f.vertex_point(rng.choice(verts))
    e = rng.choice(f.tree_edges(tid))
    k = rng.randint(0, den)
    return f.edge_point(e.id, e.length * k / den)


def _random_arc_map(rng: random.Random, f: Forest, name: str) -> PartialIsometry | None:
    t1 = rng.randrange(f.n_trees)
    p, q = _random_point(rng, f, t1), _random_point(rng, f, t1)
    length = f.distance(p, q)
    t2 = rng.randrange(f.n_trees)
    r = _random_point(rng, f, t2)
    far = [w for w in f.tree_vertices(t2) if f.distance(r, f.vertex_point(w)) >= length]
    if not far:
        return None
    w = f.vertex_point(rng.choice(far))
    s = f.point_along(r, w, length)
    if rng.random() < 0.5:
        r, s = s, r
    return build_isometry(f, name, [(p, r), (q, s)])


def _random_identity(rng: random.Random, f: Forest, name: str) -> PartialIsometry:
    t = rng.randrange(f.n_trees)
    pts = [_random_point(rng, f, t) for _ in range(rng.randint(1, 3))]
    k = f.hull(pts)
    return build_isometry(f, name, [(g, g) for g in k.gens])


def random_system(rng: random.Random, max_edges: int = 8, max_gens: int = 5, fld: Field | None = None) -> System:
    """Random forest with at most ``max_edges`` edges and up to ``max_gens``
    generators: mostly arc isometries, sometimes an identity on a small subtree."""
    f = random_forest(rng, max_edges, fld=fld)
    gens = []
    n = rng.randint(1, max_gens)
    while len(gens) < n:
        name = f"g{len(gens) + 1}"
        a = _random_identity(rng, f, name) if rng.random() < 0.15 else _random_arc_map(rng, f, name)
        if a is not None:
            gens.append(a)
    return System(f, tuple(gens), name="random")


# -- coverings for the subtree index lemma -------------------------------------------------------

@dataclass
class CutCover:
    """Two cut partitions of one tree.

    ``pieces`` are the subtrees; ``atoms`` lists, for every piece, the segments
    ``(edge id, lo, hi)`` it consists of.  The atom data is enough to count
    coverings without any tree geometry.
    """

    forest: Forest
    tree: Subtree
    pieces: list
    atoms: list


def _cut_pieces(f: Forest, tid: int, cuts: set, marks: list) -> tuple[list, list]:
    """Closures of the components of the tree minus ``cuts``, as subtrees and atom lists."""
    segs = []
    for e in f.tree_edges(tid):
        offs = sorted({off for eid, off in marks if eid == e.id} | {e.length * 0, e.length})
        for lo, hi in zip(offs, offs[1:]):
            segs.append((e.id, lo, hi))
    parent = list(range(len(segs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    ends: dict = {}
    for i, (eid, lo, hi) in enumerate(segs):
        for off in (lo, hi):
            p = f.edge_point(eid, off)
            if p in cuts:
                continue
            if p in ends:
                parent[find(i)] = find(ends[p])
            else:
                ends[p] = i
    classes: dict = {}
    for i in range(len(segs)):
        classes.setdefault(find(i), []).append(segs[i])
    pieces, atoms = [], []
    for group in sorted(classes.values(), key=lambda g: (g[0][0], g[0][1])):
        pts = [f.edge_point(eid, off) for eid, lo, hi in group for off in (lo, hi)]
        pieces.append(f.hull(pts))
        atoms.append(group)
    return pieces, atoms


def random_cut_cover(rng: random.Random, max_edges: int = 6, max_cuts: int = 4) -> CutCover:
    fld = Field(0)
    f = random_forest(rng, max_edges, max_trees=1, fld=fld)
    edges = f.tree_edges(0)
    cut_sets = []
    for _ in range(2):
        cuts = set()
        for _ in range(rng.randint(0, max_cuts)):
            e = rng.choice(edges)
            cuts.add(f.edge_point(e.id, e.length * rng.randint(0, 4) / 4))
        cut_sets.append(cuts)
    marks = []
    for p in set().union(*cut_sets):
        if p.vertex is None:
            marks.append((p.edge, p.offset))
    pieces, atoms = [], []
    for cuts in cut_sets:
        ps, ats = _cut_pieces(f, 0, cuts, marks)
        pieces += ps
        atoms += ats
    return CutCover(f, f.tree_subtree(0), pieces, atoms)
