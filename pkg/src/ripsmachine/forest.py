"""Finite metric forests and the metric primitives on them.

A :class:`Forest` is a finite disjoint union of simplicial trees whose edges
carry exact positive lengths.  Every tree is rooted at its first listed
vertex; internally a point is located by ``(child vertex, height)``, where the
child vertex is the lower end of the edge carrying the point and the height is
the distance to the root.  Distances, medians and arcs are then read off from
lowest common ancestors.

Subtrees (closed convex subsets) are stored by their extremal points only.
``None`` stands for the empty subtree throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .errors import ForestError, NoPathError
from .scalar import Field, Scalar

__all__ = ["Point", "Subtree", "Edge", "Cell", "Forest"]

_CACHE_LIMIT = 500_000


class Point(NamedTuple):
    """A vertex, or an interior point of an edge at ``offset`` from its origin.

    Build points through :meth:`Forest.vertex_point` / :meth:`Forest.edge_point`
    so that edge ends are folded into vertices.
    """

    vertex: str | None = None
    edge: str | None = None
    offset: Scalar | None = None

    @property
    def sort_key(self) -> tuple:
        if self.vertex is not None:
            return (0, self.vertex, 0)
        return (1, self.edge, self.offset)

    def __lt__(self, other: "Point") -> bool:
        return self.sort_key < other.sort_key

    def render(self) -> str:
        if self.vertex is not None:
            return self.vertex
        return f"{self.edge}@{self.offset.render()}"

    def __repr__(self):
        return f"Point({self.render()})"


@dataclass(frozen=True)
class Subtree:
    """Closed convex hull of ``gens`` inside tree number ``tree``.

    ``gens`` is the sorted minimal generating set, i.e. the extremal points.
    """

    tree: int
    gens: tuple[Point, ...]

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.tree, self.gens))
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def is_point(self) -> bool:
        return len(self.gens) == 1

    @property
    def sort_key(self) -> tuple:
        return (self.tree, tuple(g.sort_key for g in self.gens))

    def __lt__(self, other: "Subtree") -> bool:
        return self.sort_key < other.sort_key

    def render(self) -> str:
        return "{" + ", ".join(g.render() for g in self.gens) + "}"


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    length: Scalar


@dataclass(frozen=True)
class Cell:
    """Open segment between two consecutive marked points of one edge."""

    edge: str
    a: Point
    b: Point
    length: Scalar
    mid: Point


@dataclass
class _Tree:
    vertices: list[str]
    edges: list[str]
    root: str
    parent: dict[str, str | None] = field(default_factory=dict)
    parent_edge: dict[str, str | None] = field(default_factory=dict)
    level: dict[str, int] = field(default_factory=dict)


class Forest:
    """Immutable finite metric forest.

    ``trees`` is a sequence of ``(vertices, edges)`` pairs where ``edges`` are
    :class:`Edge` records.  Vertex and edge ids must be unique forest-wide.
    """

    def __init__(self, trees: Sequence[tuple[Sequence[str], Sequence[Edge]]], field_: Field | None = None):
        self.field = field_ or Field(0)
        self._trees: list[_Tree] = []
        self._edges: dict[str, Edge] = {}
        self._vtree: dict[str, int] = {}
        self._etree: dict[str, int] = {}
        self._depth: dict[str, Scalar] = {}
        self._child: dict[str, str] = {}
        self._flipped: dict[str, bool] = {}
        self._lca_cache: dict[tuple[str, str], str] = {}
        self._loc_cache: dict[Point, tuple[str, Scalar]] = {}
        self._dist_cache: dict[tuple[Point, Point], Scalar] = {}
        self._median_cache: dict[tuple[Point, Point, Point], Point] = {}
        self._span_cache: dict[Subtree, tuple | None] = {}
        self._pair_edge: dict[tuple[str, str], str] = {}
        for tid, (verts, edges) in enumerate(trees):
            self._add_tree(tid, [str(v) for v in verts], list(edges))

    # -- construction -----------------------------------------------------
    def _add_tree(self, tid: int, verts: list[str], edges: list[Edge]) -> None:
        if not verts:
            raise ForestError(f"tree {tid} has no vertices")
        for v in verts:
            if v in self._vtree:
                raise ForestError(f"duplicate vertex id {v!r}")
            self._vtree[v] = tid
        if len(edges) != len(verts) - 1:
            raise ForestError(
                f"tree {tid} is not a tree: {len(edges)} edges for {len(verts)} vertices")
        adj: dict[str, list[tuple[str, str]]] = {v: [] for v in verts}
        for e in edges:
            if e.id in self._edges:
                raise ForestError(f"duplicate edge id {e.id!r}")
            if e.src not in adj or e.dst not in adj:
                raise ForestError(f"edge {e.id!r} has an endpoint outside tree {tid}")
            if e.src == e.dst:
                raise ForestError(f"edge {e.id!r} is a loop")
            length = self.field.coerce(e.length)
            if length.sign() <= 0:
                raise ForestError(f"edge {e.id!r}: edge length must be positive")
            e = Edge(e.id, e.src, e.dst, length)
            self._edges[e.id] = e
            self._etree[e.id] = tid
            adj[e.src].append((e.dst, e.id))
            adj[e.dst].append((e.src, e.id))
            self._pair_edge[(e.src, e.dst)] = e.id
            self._pair_edge[(e.dst, e.src)] = e.id
        t = _Tree(verts, [e.id for e in edges], verts[0])
        t.parent[t.root] = None
        t.parent_edge[t.root] = None
        t.level[t.root] = 0
        self._depth[t.root] = self.field.zero
        stack = [t.root]
        while stack:
            u = stack.pop()
            for w, eid in adj[u]:
                if w == t.parent[u] and eid == t.parent_edge[u]:
                    continue
                if w in t.parent:
                    raise ForestError(f"tree {tid} contains a cycle through {w!r}")
                t.parent[w] = u
                t.parent_edge[w] = eid
                t.level[w] = t.level[u] + 1
                self._depth[w] = self._depth[u] + self._edges[eid].length
                self._child[eid] = w
                self._flipped[eid] = self._edges[eid].src == w
                stack.append(w)
        if len(t.parent) != len(verts):
            raise ForestError(f"tree {tid} is not connected")
        self._trees.append(t)

    # -- basic accessors ----------------------------------------------------
    @property
    def n_trees(self) -> int:
        return len(self._trees)

    def components(self) -> list[int]:
        return list(range(len(self._trees)))

    def tree_vertices(self, tid: int) -> list[str]:
        return list(self._trees[tid].vertices)

    def tree_edges(self, tid: int) -> list[Edge]:
        return [self._edges[e] for e in self._trees[tid].edges]

    def edges(self) -> list[Edge]:
        return list(self._edges.values())

    def edge(self, eid: str) -> Edge:
        return self._edges[eid]

    def vertex_tree(self, v: str) -> int:
        return self._vtree[v]

    def degree(self, v: str) -> int:
        t = self._trees[self._vtree[v]]
        return sum(1 for e in t.edges if v in (self._edges[e].src, self._edges[e].dst))

    def tree_of(self, p: Point) -> int:
        try:
            if p.vertex is not None:
                return self._vtree[p.vertex]
            return self._etree[p.edge]
        except KeyError:
            raise ForestError(f"point {p.render()} does not belong to the forest") from None

    def total_length(self) -> Scalar:
        total = self.field.zero
        for e in self._edges.values():
            total = total + e.length
        return total

    # -- points -------------------------------------------------------------
    def vertex_point(self, v) -> Point:
        v = str(v)
        if v not in self._vtree:
            raise ForestError(f"unknown vertex {v!r}")
        return Point(vertex=v)

    def edge_point(self, eid: str, offset) -> Point:
        """Point on edge ``eid`` at ``offset`` from its ``src`` end."""
        if eid not in self._edges:
            raise ForestError(f"unknown edge {eid!r}")
        e = self._edges[eid]
        t = self.field.coerce(offset)
        c = t.compare(e.length)
        if t.sign() < 0 or c > 0:
            raise ForestError(f"offset {t} outside edge {eid!r} of length {e.length}")
        if t.sign() == 0:
            return Point(vertex=e.src)
        if c == 0:
            return Point(vertex=e.dst)
        return Point(edge=eid, offset=t)

    def parse_point(self, text) -> Point:
        """``"v"`` for a vertex or ``"edge@offset"`` for an edge point."""
        if isinstance(text, dict):
            if "vertex" in text:
                return self.vertex_point(text["vertex"])
            return self.edge_point(str(text["edge"]), text["offset"])
        if isinstance(text, (list, tuple)) and len(text) == 2:
            return self.edge_point(str(text[0]), text[1])
        text = str(text)
        if "@" in text:
            eid, off = text.split("@", 1)
            return self.edge_point(eid.strip(), self.field.parse(off))
        return self.vertex_point(text.strip())

    def _loc(self, p: Point) -> tuple[str, Scalar]:
        hit = self._loc_cache.get(p)
        if hit is not None:
            return hit
        if p.vertex is not None:
            if p.vertex not in self._vtree:
                raise ForestError(f"unknown vertex {p.vertex!r}")
            loc = (p.vertex, self._depth[p.vertex])
        else:
            if p.edge not in self._edges:
                raise ForestError(f"unknown edge {p.edge!r}")
            c = self._child[p.edge]
            if self._flipped[p.edge]:
                loc = (c, self._depth[c] - p.offset)
            else:
                loc = (c, self._depth[c] - self._edges[p.edge].length + p.offset)
        self._loc_cache[p] = loc
        return loc

    def _at_height(self, c: str, h: Scalar) -> Point:
        """Point of height ``h`` on the root path of vertex ``c``."""
        t = self._trees[self._vtree[c]]
        while True:
            dc = self._depth[c]
            cmp = h.compare(dc)
            if cmp == 0:
                return Point(vertex=c)
            par = t.parent[c]
            if par is None:
                raise ForestError("height above the root")
            if cmp < 0 and h.compare(self._depth[par]) <= 0:
                c = par
                continue
            eid = t.parent_edge[c]
            off = dc - h if self._flipped[eid] else h - self._depth[par]
            return Point(edge=eid, offset=off)

    def _lca(self, u: str, v: str) -> str:
        if u == v:
            return u
        key = (u, v) if u < v else (v, u)
        hit = self._lca_cache.get(key)
        if hit is not None:
            return hit
        t = self._trees[self._vtree[u]]
        a, b = u, v
        while t.level[a] > t.level[b]:
            a = t.parent[a]
        while t.level[b] > t.level[a]:
            b = t.parent[b]
        while a != b:
            a, b = t.parent[a], t.parent[b]
        self._lca_cache[key] = a
        return a

    def _meet_height(self, c1, h1, c2, h2) -> Scalar:
        m = self._depth[self._lca(c1, c2)]
        low = h1 if h1 <= h2 else h2
        return low if low <= m else m

    def _same_tree(self, p: Point, q: Point) -> int:
        tp, tq = self.tree_of(p), self.tree_of(q)
        if tp != tq:
            raise NoPathError(f"{p.render()} and {q.render()} lie in different components")
        return tp

    # -- metric ---------------------------------------------------------------
    def distance(self, p: Point, q: Point) -> Scalar:
        key = (p, q)
        hit = self._dist_cache.get(key)
        if hit is not None:
            return hit
        if p == q:
            self.tree_of(p)
            d = self.field.zero
        else:
            self._same_tree(p, q)
            c1, h1 = self._loc(p)
            c2, h2 = self._loc(q)
            m = self._meet_height(c1, h1, c2, h2)
            d = h1 + h2 - m - m
        if len(self._dist_cache) > _CACHE_LIMIT:
            self._dist_cache.clear()
        self._dist_cache[key] = d
        self._dist_cache[(q, p)] = d
        return d

    def point_along(self, p: Point, q: Point, s) -> Point:
        """The point of ``[p; q]`` at distance ``s`` from ``p``."""
        s = self.field.coerce(s)
        self._same_tree(p, q)
        c1, h1 = self._loc(p)
        c2, h2 = self._loc(q)
        m = self._meet_height(c1, h1, c2, h2)
        up = h1 - m
        total = up + h2 - m
        if s.sign() < 0 or s > total:
            raise ForestError(f"distance {s} outside arc of length {total}")
        if s <= up:
            return self._at_height(c1, h1 - s)
        return self._at_height(c2, m + (s - up))

    def median(self, a: Point, b: Point, c: Point) -> Point:
        """Unique point common to the three arcs between ``a``, ``b``, ``c``."""
        key = (a, b, c)
        hit = self._median_cache.get(key)
        if hit is None:
            hit = self._median(a, b, c)
            if len(self._median_cache) > _CACHE_LIMIT:
                self._median_cache.clear()
            self._median_cache[key] = hit
        return hit

    def _median(self, a: Point, b: Point, c: Point) -> Point:
        self._same_tree(a, b)
        self._same_tree(a, c)
        ca, ha = self._loc(a)
        cb, hb = self._loc(b)
        cc, hc = self._loc(c)
        mab = self._meet_height(ca, ha, cb, hb)
        mac = self._meet_height(ca, ha, cc, hc)
        mbc = self._meet_height(cb, hb, cc, hc)
        if mab >= mac and mab >= mbc:
            return self._at_height(ca, mab)
        if mac >= mbc:
            return self._at_height(ca, mac)
        return self._at_height(cb, mbc)

    def on_arc(self, p: Point, a: Point, b: Point) -> bool:
        """Whether ``p`` lies on ``[a; b]`` (all three in one tree)."""
        if p == a or p == b:
            return True
        if a == b:
            return False
        return self.distance(a, p) + self.distance(p, b) == self.distance(a, b)

    # -- subtrees ---------------------------------------------------------------
    def hull(self, points: Iterable[Point]) -> Subtree:
        """Convex hull of a non-empty set of points of one tree."""
        pts = sorted(set(points), key=lambda x: x.sort_key)
        if not pts:
            raise ForestError("hull of an empty point set")
        tid = self.tree_of(pts[0])
        for x in pts[1:]:
            if self.tree_of(x) != tid:
                raise NoPathError("hull of points from different components")
        keep = list(pts)
        i = 0
        while i < len(keep) and len(keep) > 2:
            p = keep[i]
            others = keep[:i] + keep[i + 1:]
            if any(self.on_arc(p, a, b) for a, b in itertools.combinations(others, 2)):
                keep.pop(i)
            else:
                i += 1
        if len(keep) == 2 and keep[0] == keep[1]:
            keep = keep[:1]
        return Subtree(tid, tuple(keep))

    def arc(self, p: Point, q: Point) -> Subtree:
        self._same_tree(p, q)
        return self.hull([p, q])

    def tree_subtree(self, tid: int) -> Subtree:
        """The whole tree ``tid`` as a subtree (generated by its leaves)."""
        t = self._trees[tid]
        if len(t.vertices) == 1:
            return Subtree(tid, (Point(vertex=t.vertices[0]),))
        leaves = [Point(vertex=v) for v in t.vertices if self.degree(v) == 1]
        return Subtree(tid, tuple(sorted(leaves, key=lambda x: x.sort_key)))

    def whole(self) -> list[Subtree]:
        return [self.tree_subtree(t) for t in range(self.n_trees)]

    def _arcs(self, k: Subtree):
        if len(k.gens) == 1:
            return [(k.gens[0], k.gens[0])]
        return list(itertools.combinations(k.gens, 2))

    def contains(self, k: Subtree | None, p: Point) -> bool:
        if k is None or self.tree_of(p) != k.tree:
            return False
        if len(k.gens) == 1:
            return p == k.gens[0]
        return any(self.on_arc(p, a, b) for a, b in itertools.combinations(k.gens, 2))

    def includes(self, big: Subtree | None, small: Subtree | None) -> bool:
        """Whether ``small`` is a subset of ``big``."""
        if small is None:
            return True
        if big is None:
            return False
        return all(self.contains(big, g) for g in small.gens)

    def _arc_meet(self, a, b, c, d) -> list[Point]:
        p = self.median(a, b, c)
        q = self.median(a, b, d)
        if p != q:
            return [p, q]
        if self.on_arc(p, c, d):
            return [p]
        return []

    def _offset_on(self, p: Point, eid: str) -> Scalar | None:
        if p.edge is not None:
            return p.offset if p.edge == eid else None
        e = self._edges[eid]
        if p.vertex == e.src:
            return self.field.zero
        if p.vertex == e.dst:
            return e.length
        return None

    def _span(self, k: Subtree) -> tuple | None:
        """``(edge, lo, hi)`` when ``k`` is a non-degenerate segment of one edge."""
        hit = self._span_cache.get(k, False)
        if hit is not False:
            return hit
        out = None
        if len(k.gens) == 2:
            a, b = k.gens
            eid = a.edge or b.edge or self._pair_edge.get((a.vertex, b.vertex))
            if eid is not None:
                x, y = self._offset_on(a, eid), self._offset_on(b, eid)
                if x is not None and y is not None:
                    out = (eid, x, y) if x < y else (eid, y, x)
        if len(self._span_cache) > _CACHE_LIMIT:
            self._span_cache.clear()
        self._span_cache[k] = out
        return out

    def intersect(self, k1: Subtree | None, k2: Subtree | None) -> Subtree | None:
        """Intersection of two closed subtrees; ``None`` when empty."""
        if k1 is None or k2 is None or k1.tree != k2.tree:
            return None
        if k1 == k2:
            return k1
        s1, s2 = self._span(k1), self._span(k2)
        if s1 is None and s2 is not None and len(k1.gens) == 1:
            k1, k2, s1, s2 = k2, k1, s2, s1
        if s1 is not None and s2 is None and len(k2.gens) == 1:
            t = self._offset_on(k2.gens[0], s1[0])
            if t is not None:
                return k2 if s1[1] <= t <= s1[2] else None
        if s1 is not None and s2 is not None and s1[0] == s2[0]:
            lo = s1[1] if s1[1] > s2[1] else s2[1]
            hi = s1[2] if s1[2] < s2[2] else s2[2]
            c = lo.compare(hi)
            if c > 0:
                return None
            if c == 0:
                return Subtree(k1.tree, (self.edge_point(s1[0], lo),))
            return Subtree(k1.tree, tuple(sorted((self.edge_point(s1[0], lo), self.edge_point(s1[0], hi)),
                                                 key=lambda q: q.sort_key)))
        pts: list[Point] = []
        for a, b in self._arcs(k1):
            for c, d in self._arcs(k2):
                pts.extend(self._arc_meet(a, b, c, d))
        if not pts:
            return None
        return self.hull(pts)

    def union_hull(self, subtrees: Iterable[Subtree]) -> Subtree:
        pts = [g for k in subtrees for g in k.gens]
        return self.hull(pts)

    def diameter(self, k: Subtree | None) -> Scalar:
        if k is None or len(k.gens) == 1:
            return self.field.zero
        return max(self.distance(a, b) for a, b in itertools.combinations(k.gens, 2))

    def length(self, k: Subtree | None) -> Scalar:
        """One-dimensional measure of a subtree."""
        total = self.field.zero
        if k is None:
            return total
        seen = [k.gens[0]]
        for g in k.gens[1:]:
            if len(seen) == 1:
                gap = self.distance(g, seen[0])
            else:
                gap = min((self.distance(g, a) + self.distance(g, b) - self.distance(a, b)) / 2
                          for a, b in itertools.combinations(seen, 2))
            total = total + gap
            seen.append(g)
        return total

    def distance_to(self, p: Point, k: Subtree) -> Scalar:
        if len(k.gens) == 1:
            return self.distance(p, k.gens[0])
        return min((self.distance(p, a) + self.distance(p, b) - self.distance(a, b)) / 2
                   for a, b in itertools.combinations(k.gens, 2))

    def bridge(self, k1: Subtree, k2: Subtree) -> tuple[Point, Point]:
        """Endpoints ``(p, q)`` of the shortest arc from ``k1`` to ``k2``.

        The subtrees must lie in one tree and be disjoint.
        """
        if k1.tree != k2.tree:
            raise NoPathError("bridge between different components")
        x, y = k1.gens[0], k2.gens[0]
        near = self.intersect(self.arc(x, y), k1)
        p = max(near.gens, key=lambda g: self.distance(x, g))
        far = self.intersect(self.arc(p, y), k2)
        q = max(far.gens, key=lambda g: self.distance(y, g))
        if p == q:
            raise ForestError("bridge requested between intersecting subtrees")
        return p, q

    # -- shortening ---------------------------------------------------------------
    def chop(self, eps, components: Sequence[Subtree] | None = None) -> list[Subtree | None]:
        """The points that are midpoints of a segment of length ``2*eps``.

        Returns one entry per component (``None`` when nothing survives).
        """
        eps = self.field.coerce(eps)
        if eps.sign() <= 0:
            raise ValueError("chop needs eps > 0")
        comps = list(components) if components is not None else self.whole()
        out: list[Subtree | None] = []
        for k in comps:
            pts = []
            for a, b in itertools.combinations(k.gens, 2):
                if self.distance(a, b) >= eps + eps:
                    pts.append(self.point_along(a, b, eps))
                    pts.append(self.point_along(b, a, eps))
            out.append(self.hull(pts) if pts else None)
        return out

    # -- cell decomposition -------------------------------------------------------
    def cells(self, tid: int, marks: Iterable[Point]) -> tuple[list[Point], list[Cell]]:
        """Subdivide tree ``tid`` at its vertices and at ``marks``.

        Returns the marked points (vertices plus edge points) and the open
        cells between consecutive marked points of each edge.
        """
        t = self._trees[tid]
        by_edge: dict[str, set[Scalar]] = {e: set() for e in t.edges}
        for p in marks:
            if self.tree_of(p) != tid:
                continue
            if p.edge is not None:
                by_edge[p.edge].add(p.offset)
        verts = [Point(vertex=v) for v in t.vertices]
        cells: list[Cell] = []
        extra: list[Point] = []
        for eid in t.edges:
            e = self._edges[eid]
            offs = sorted(by_edge[eid])
            chain = [Point(vertex=e.src)] + [Point(edge=eid, offset=o) for o in offs] + [Point(vertex=e.dst)]
            extra.extend(chain[1:-1])
            stops = [self.field.zero] + offs + [e.length]
            for i in range(len(chain) - 1):
                lo, hi = stops[i], stops[i + 1]
                cells.append(Cell(eid, chain[i], chain[i + 1], hi - lo, Point(edge=eid, offset=(lo + hi) / 2)))
        return verts + extra, cells

    # -- extraction -----------------------------------------------------------------
    def extract(self, pieces: Sequence[Subtree]):
        """Build a standalone forest from disjoint subtrees.

        Returns ``(forest, to_new)`` where ``to_new`` maps a point of one of
        the pieces to the corresponding point of the new forest.
        """
        trees = []
        segs: dict[str, list[tuple[Scalar, Scalar, str]]] = {}
        vname: dict[Point, str] = {}

        def name(p: Point) -> str:
            if p not in vname:
                vname[p] = p.vertex if p.vertex is not None else f"{p.edge}:{p.offset.render()}"
            return vname[p]

        for k in pieces:
            if k is None:
                continue
            verts: list[str] = []
            edges: list[Edge] = []
            if k.is_point:
                verts.append(name(k.gens[0]))
                trees.append((verts, edges))
                continue
            for eid in self._trees[k.tree].edges:
                e = self._edges[eid]
                seg = self.intersect(self.arc(Point(vertex=e.src), Point(vertex=e.dst)), k)
                if seg is None or seg.is_point:
                    continue
                ends = sorted(seg.gens, key=lambda g: self.distance(Point(vertex=e.src), g))
                lo = self.distance(Point(vertex=e.src), ends[0])
                hi = self.distance(Point(vertex=e.src), ends[1])
                whole = lo.sign() == 0 and hi == e.length
                new_id = eid if whole else f"{eid}.{len(segs.get(eid, [])) + 1}"
                segs.setdefault(eid, []).append((lo, hi, new_id))
                for g in ends:
                    if name(g) not in verts:
                        verts.append(name(g))
                edges.append(Edge(new_id, name(ends[0]), name(ends[1]), hi - lo))
            trees.append((verts, edges))
        new = Forest(trees, self.field)

        def to_new(p: Point) -> Point:
            if p in vname:
                return Point(vertex=vname[p])
            if p.vertex is not None:
                return new.vertex_point(p.vertex)
            for lo, hi, nid in segs.get(p.edge, []):
                if lo <= p.offset <= hi:
                    return new.edge_point(nid, p.offset - lo)
            raise ForestError(f"point {p.render()} lies outside the extracted pieces")

        return new, to_new
