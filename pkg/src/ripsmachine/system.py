"""Systems of isometries, their associated graph and the pseudo-action.

Letters of the alphabet ``A^{+-1}`` are ``(name, exp)`` pairs with ``exp`` in
``{1, -1}``; words are tuples of letters acting on the right.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import BudgetExhausted, DomainError, ForestError, PreconditionError, WordError
from .forest import Forest, Point, Subtree
from .graph import GraphMorphism, MultiGraph
from .isometry import PartialIsometry, compose
from .scalar import Scalar

__all__ = [
    "Letter", "System", "parse_word", "render_word", "reduce_word", "inverse_word",
    "CertificateReport", "TrajectoryView", "CayleyView",
    "independence_certificate", "trajectory_tree", "cayley_view",
]

Letter = tuple  # (name, exp)


def letter_key(z: Letter) -> tuple:
    return (z[0], 0 if z[1] > 0 else 1)


def render_letter(z: Letter) -> str:
    return z[0] if z[1] > 0 else f"{z[0]}^-1"


def render_word(w: Sequence[Letter]) -> str:
    return ".".join(render_letter(z) for z in w) if w else "1"


def inverse_letter(z: Letter) -> Letter:
    return (z[0], -z[1])


def inverse_word(w: Sequence[Letter]) -> tuple:
    return tuple(inverse_letter(z) for z in reversed(w))


def reduce_word(w: Sequence[Letter]) -> tuple:
    out: list = []
    for z in w:
        if out and out[-1] == inverse_letter(z):
            out.pop()
        else:
            out.append(tuple(z))
    return tuple(out)


_TOKEN = re.compile(r"^([A-Za-z_][\w#\-]*?)(\^-1|\^\+?1)?$")


def parse_word(text: str) -> tuple:
    """Parse ``"a.b^-1.c"`` (``.``, ``,`` or whitespace separated); ``"1"`` is empty."""
    text = text.strip()
    if text in ("", "1"):
        return ()
    out = []
    for tok in re.split(r"[.,\s]+", text):
        if not tok:
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise WordError(f"cannot parse letter {tok!r}")
        exp = -1 if m.group(2) == "^-1" else 1
        out.append((m.group(1), exp))
    return tuple(out)


@dataclass(frozen=True)
class System:
    """A forest (given as disjoint subtrees of an ambient forest) and named
    partial isometries between them.

    ``independence`` is ``"declared"`` when the user asserts independent
    generators, ``"certified:<d>"`` after a passing depth-``d`` certificate,
    and ``None`` otherwise.
    """

    forest: Forest
    generators: tuple[PartialIsometry, ...]
    components: tuple[Subtree, ...] = None
    independence: str | None = None
    name: str = ""

    def __post_init__(self):
        if self.components is None:
            object.__setattr__(self, "components", tuple(self.forest.whole()))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "components", tuple(self.components))
        names = [a.name for a in self.generators]
        if len(set(names)) != len(names):
            raise PreconditionError("generator names must be distinct")
        for a in self.generators:
            self.component_index(a.domain)
            self.component_index(a.range)

    # -- structure ------------------------------------------------------------
    @cached_property
    def _by_name(self) -> dict:
        return {a.name: a for a in self.generators}

    @cached_property
    def _letter_maps(self) -> dict:
        out = {}
        for a in self.generators:
            out[(a.name, 1)] = a
            out[(a.name, -1)] = a.inverse()
        return out

    @cached_property
    def letters(self) -> tuple:
        return tuple(sorted(self._letter_maps, key=letter_key))

    def generator(self, name: str) -> PartialIsometry:
        try:
            return self._by_name[name]
        except KeyError:
            raise WordError(f"unknown generator {name!r}") from None

    def letter_map(self, z: Letter) -> PartialIsometry:
        try:
            return self._letter_maps[tuple(z)]
        except KeyError:
            raise WordError(f"unknown letter {render_letter(z)!r}") from None

    def domain(self, z: Letter) -> Subtree:
        return self.letter_map(z).domain

    @cached_property
    def _component_memo(self) -> dict:
        return {}

    def component_index(self, k: Subtree | Point) -> int:
        memo = self._component_memo
        if k in memo:
            return memo[k]
        memo[k] = i = self._component_index(k)
        return i

    def _component_index(self, k: Subtree | Point) -> int:
        f = self.forest
        if isinstance(k, Point):
            for i, c in enumerate(self.components):
                if f.contains(c, k):
                    return i
            raise ForestError(f"point {k.render()} lies outside the system's forest")
        for i, c in enumerate(self.components):
            if c.tree == k.tree and f.includes(c, k):
                return i
        raise ForestError(f"subtree {k.render()} is not inside a single component")

    def contains(self, p: Point) -> bool:
        return any(self.forest.contains(c, p) for c in self.components)

    def total_length(self) -> Scalar:
        total = self.forest.field.zero
        for c in self.components:
            total = total + self.forest.length(c)
        return total

    def max_component_diameter(self) -> Scalar:
        if not self.components:
            return self.forest.field.zero
        return max(self.forest.diameter(c) for c in self.components)

    def with_generators(self, gens: Iterable[PartialIsometry], components=None) -> System:
        return System(self.forest, tuple(gens), self.components if components is None else tuple(components),
                      self.independence, self.name)

    def breakpoints(self) -> list[Point]:
        """Extremal points of components, domains and ranges, sorted."""
        pts = {g for c in self.components for g in c.gens}
        for a in self.generators:
            pts.update(a.domain.gens)
            pts.update(a.range.gens)
        return sorted(pts, key=lambda p: p.sort_key)

    def valence(self, p: Point) -> int:
        """Number of letters whose (closed) domain contains ``p``."""
        return sum(1 for z in self.letters if self.forest.contains(self.domain(z), p))

    # -- associated graph -------------------------------------------------------------
    def vertex_id(self, i: int) -> str:
        return f"K{i}"

    def associated_graph(self) -> MultiGraph:
        g = MultiGraph()
        for i, c in enumerate(self.components):
            g.vertices[self.vertex_id(i)] = f"K{i} {c.render()}"
        for a in sorted(self.generators, key=lambda x: x.name):
            g.add_edge(a.name, self.vertex_id(self.component_index(a.domain)),
                       self.vertex_id(self.component_index(a.range)), a.name)
        return g

    # -- words --------------------------------------------------------------------------
    def normalize(self, w: Sequence[Letter] | str) -> tuple[tuple, bool]:
        """Return the reduced form of ``w`` and whether reduction changed it."""
        if isinstance(w, str):
            w = parse_word(w)
        w = tuple(tuple(z) for z in w)
        for z in w:
            self.letter_map(z)
        r = reduce_word(w)
        return r, r != w

    def word_isometry(self, w: Sequence[Letter] | str, strict: bool = False) -> PartialIsometry | None:
        """Partial isometry of a non-empty word; ``None`` when not admissible."""
        r, changed = self.normalize(w)
        if changed and strict:
            raise WordError(f"word {render_word(w) if not isinstance(w, str) else w} is not reduced")
        if not r:
            raise WordError("the empty word acts as the identity of the forest")
        acc = self.letter_map(r[0])
        for z in r[1:]:
            acc = compose(acc, self.letter_map(z))
            if acc is None:
                return None
        return acc

    def word_domain(self, w: Sequence[Letter] | str, strict: bool = False, base: Point | None = None):
        """Domain of ``w`` (``None`` if ``w`` is not admissible).

        The empty word is the identity of the forest: the component of
        ``base`` when given, otherwise the tuple of all components.
        """
        r, changed = self.normalize(w)
        if changed and strict:
            raise WordError("word is not reduced")
        if not r:
            if base is not None:
                return self.components[self.component_index(base)]
            return self.components
        iso = self.word_isometry(r)
        return None if iso is None else iso.domain

    def act(self, p: Point, z: Letter) -> Point | None:
        """``p.z`` or ``None`` when ``p`` is outside ``dom(z)``."""
        try:
            return self.letter_map(z).apply(p)
        except DomainError:
            return None

    def act_word(self, p: Point, w: Sequence[Letter]) -> Point | None:
        for z in w:
            p = self.act(p, z)
            if p is None:
                return None
        return p


def trusted_system(forest: Forest, generators: tuple, components: tuple, independence, name: str,
                   memo: dict) -> System:
    """Build a :class:`System` whose consistency is already known, with a
    pre-filled component lookup table (used by the Rips step)."""
    s = object.__new__(System)
    for k, v in (("forest", forest), ("generators", generators), ("components", components),
                 ("independence", independence), ("name", name)):
        object.__setattr__(s, k, v)
    s.__dict__["_component_memo"] = memo
    return s


# -- independence certificate -------------------------------------------------------------

@dataclass
class CertificateReport:
    depth: int
    max_diameter: Scalar
    witness: tuple
    profile: list
    word_counts: list
    certified: bool
    passes: bool
    refuted: bool = False

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "max_diameter": self.max_diameter.render(),
            "witness": render_word(self.witness) if self.witness else "",
            "profile": [x.render() for x in self.profile],
            "word_counts": list(self.word_counts),
            "certified": self.certified,
            "passes": self.passes,
            "refuted": self.refuted,
        }


def _segment_letters(s: System) -> dict | None:
    """When every domain and range lies on one edge, describe each letter as
    ``(lo, hi, sign, c, range_lo, range_hi)``: the map ``x -> sign*x + c`` on
    offsets ``[lo, hi]``.  ``None`` otherwise."""
    f = s.forest
    eid = None
    for z in s.letters:
        for k in (s.domain(z), s.letter_map(z).range):
            for g in k.gens:
                if g.edge is not None:
                    if eid is not None and g.edge != eid:
                        return None
                    eid = g.edge
    if eid is None:
        return None
    out = {}
    for z in s.letters:
        m = s.letter_map(z)
        offs = [(f._offset_on(a, eid), f._offset_on(b, eid)) for a, b in m.anchors]
        if any(x is None or y is None for x, y in offs):
            return None
        (ta, ua) = offs[0]
        if len(offs) == 1:
            sgn, c = 1, ua - ta
        else:
            (tb, ub) = offs[1]
            sgn = 1 if (tb > ta) == (ub > ua) else -1
            c = ua - ta if sgn > 0 else ua + ta
        ts = sorted(x for x, _ in offs)
        us = sorted(y for _, y in offs)
        out[z] = (ts[0], ts[-1], sgn, c, us[0], us[-1])
    return out


def _has_cycle(succ: dict, keep) -> bool:
    """Cycle detection (iterative three-colour DFS) on the subgraph of ``keep`` nodes."""
    colour: dict = {}
    for root in succ:
        if root in colour or not keep(root):
            continue
        colour[root] = 1
        stack = [(root, iter(succ.get(root, ())))]
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if not keep(nxt):
                    continue
                c = colour.get(nxt)
                if c == 1:
                    return True
                if c is None:
                    colour[nxt] = 1
                    stack.append((nxt, iter(succ.get(nxt, ()))))
                    break
            else:
                colour[node] = 2
                stack.pop()
    return False


def independence_certificate(s: System, depth: int, budget: int | None = 2_000_000) -> CertificateReport:
    """Largest domain diameter among admissible reduced words of length ``depth``.

    ``certified`` means every such domain is a point (a proof of independence);
    ``passes`` additionally accepts a strict decrease of the maximal diameter
    between depths ``depth // 2`` and ``depth`` as evidence, unless the search
    is ``refuted``: the transitions between states with non-degenerate ranges
    contain a cycle, which repeats forever and yields an infinite word whose
    domain is not a point.  ``budget`` bounds the number of attempted
    word extensions.

    A word ``w`` is tracked through its range and last letter only: the domain
    of ``w`` is isometric to its range, and the extensions of ``w`` depend on
    nothing else.  Each state keeps its lexicographically least word and the
    number of words reaching it.
    """
    if depth < 1:
        raise ValueError("certificate depth must be >= 1")
    f = s.forest
    zero = f.field.zero
    maps = {z: s.letter_map(z) for z in s.letters}
    wkey = lambda w: [letter_key(z) for z in w]
    seg = _segment_letters(s)
    level: dict = {}
    for z in s.letters:
        key = (seg[z][4], seg[z][5]) if seg else maps[z].range
        level[(key, z)] = [(z,), 1]
    profile: list[Scalar] = []
    counts: list[int] = []
    steps = 0
    best, witness = zero, ()
    succ: dict = {}
    for k in range(1, depth + 1):
        if k > 1:
            nxt: dict = {}
            for (rng, last), (w, mult) in sorted(level.items(), key=lambda kv: wkey(kv[1][0])):
                back = inverse_letter(last)
                for z in s.letters:
                    if z == back:
                        continue
                    steps += 1
                    if budget is not None and steps > budget:
                        raise BudgetExhausted(f"certificate exceeded {budget} extensions at depth {k}",
                                              partial={"profile": [x.render() for x in profile], "depth": k - 1})
                    if seg:
                        dlo, dhi, sgn, c = seg[z][:4]
                        lo = rng[0] if rng[0] > dlo else dlo
                        hi = rng[1] if rng[1] < dhi else dhi
                        if lo > hi:
                            continue
                        key = ((lo + c, hi + c) if sgn > 0 else (c - hi, c - lo), z)
                    else:
                        m = maps[z]
                        mid = f.intersect(rng, m.domain)
                        if mid is None:
                            continue
                        key = (f.hull([m.apply(g) for g in mid.gens]), z)
                    succ.setdefault((rng, last), set()).add(key)
                    hit = nxt.get(key)
                    if hit is None:
                        nxt[key] = [w + (z,), mult]
                    else:
                        hit[1] += mult
            level = nxt
        best, witness = zero, ()
        for (rng, _), (w, _) in level.items():
            dia = rng[1] - rng[0] if seg else f.diameter(rng)
            if dia > best or (dia == best and witness and wkey(w) < wkey(witness)) or not witness:
                best, witness = dia, w
        profile.append(best)
        counts.append(sum(m for _, m in level.values()))
        if not level:
            profile.extend([zero] * (depth - k))
            counts.extend([0] * (depth - k))
            witness = ()
            break
    certified = best.sign() == 0
    thick = (lambda r: (r[1] - r[0]).sign() > 0) if seg else (lambda r: f.diameter(r).sign() > 0)
    refuted = not certified and _has_cycle(succ, lambda key: thick(key[0]))
    passes = certified or (not refuted and depth >= 2 and profile[depth - 1] < profile[depth // 2 - 1])
    return CertificateReport(depth, best, witness, profile, counts, certified, passes, refuted)


# -- trajectory trees and Cayley graphs ---------------------------------------------------

@dataclass
class TrajectoryView:
    base: Point
    depth: int
    points: dict          # word -> point P.w
    edges: list           # (parent word, letter, child word)
    truncated: bool
    frontier: list        # words at full depth that extend further

    def graph(self) -> MultiGraph:
        g = MultiGraph()
        for w in sorted(self.points, key=lambda x: (len(x), [letter_key(z) for z in x])):
            g.vertices[render_word(w)] = f"{render_word(w)} : {self.points[w].render()}"
        for i, (u, z, w) in enumerate(self.edges):
            # oriented along the generator, like the Cayley graph
            src, dst = (u, w) if z[1] > 0 else (w, u)
            g.add_edge(i, render_word(src), render_word(dst), z[0])
        return g


@dataclass
class CayleyView:
    base: Point
    depth: int
    graph: MultiGraph             # vertices are rendered points
    quotient: dict                # word -> vertex id
    open_vertices: set            # vertices with letters leading outside the view
    core: MultiGraph
    index: int                    # sum of valence-2 over complete core vertices
    truncated: bool


def trajectory_tree(s: System, p: Point, depth: int, budget: int | None = 1_000_000) -> TrajectoryView:
    """Depth-``depth`` truncation of the tree of admissible words defined at ``p``."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    points = {(): p}
    edges = []
    level = [()]
    steps = 0
    frontier: list = []
    for k in range(depth + 1):
        nxt = []
        for w in level:
            q = points[w]
            back = inverse_letter(w[-1]) if w else None
            for z in s.letters:
                if z == back:
                    continue
                steps += 1
                if budget is not None and steps > budget:
                    raise BudgetExhausted(f"trajectory tree exceeded {budget} steps")
                r = s.act(q, z)
                if r is None:
                    continue
                if k == depth:
                    frontier.append(w)
                    break
                child = w + (z,)
                points[child] = r
                edges.append((w, z, child))
                nxt.append(child)
        level = nxt
        if not level:
            break
    return TrajectoryView(p, depth, points, edges, bool(frontier), frontier)


def cayley_view(s: System, p: Point, depth: int, budget: int | None = 1_000_000) -> CayleyView:
    """Quotient of the trajectory tree identifying words with the same image."""
    tv = trajectory_tree(s, p, depth, budget)
    g = MultiGraph()
    quotient = {}
    for w in sorted(tv.points, key=lambda x: (len(x), [letter_key(z) for z in x])):
        vid = tv.points[w].render()
        quotient[w] = vid
        g.vertices.setdefault(vid, None)
    for u, z, w in tv.edges:
        a = z[0]
        src, dst = (quotient[u], quotient[w]) if z[1] > 0 else (quotient[w], quotient[u])
        eid = (src, a)
        if eid not in g.edges:
            g.add_edge(eid, src, dst, a)
    vpoint = {quotient[w]: tv.points[w] for w in tv.points}
    val = g.valences()
    open_v = {v for v in g.vertices if s.valence(vpoint[v]) > val[v]}
    core = _core_with_open_ends(g, open_v)
    cval = core.valences()
    index = sum(k - 2 for v, k in cval.items() if v not in open_v)
    return CayleyView(p, depth, g, quotient, open_v, core, index, tv.truncated)


def _core_with_open_ends(g: MultiGraph, open_v: set) -> MultiGraph:
    """Core of a truncated view: open vertices continue to infinity and are kept."""
    val = g.valences()
    alive_v, alive_e = set(g.vertices), set(g.edges)
    changed = True
    while changed:
        changed = False
        for v in list(alive_v):
            if v in open_v or val[v] > 1:
                continue
            alive_v.discard(v)
            changed = True
            for eid in list(alive_e):
                e = g.edges[eid]
                if v in (e.src, e.dst):
                    alive_e.discard(eid)
                    val[e.src] -= 1
                    val[e.dst] -= 1
    return g.subgraph(alive_v, alive_e)


def cayley_quotient_morphism(tv: TrajectoryView, cv: CayleyView) -> GraphMorphism:
    """Quotient map from the trajectory view to the Cayley view (unoriented edges
    are matched by their generator and endpoints)."""
    tg = tv.graph()
    vmap = {render_word(w): cv.quotient[w] for w in tv.points}
    emap = {}
    for i, (u, z, w) in enumerate(tv.edges):
        src, dst = (cv.quotient[u], cv.quotient[w]) if z[1] > 0 else (cv.quotient[w], cv.quotient[u])
        emap[i] = (src, z[0])
    return GraphMorphism(tg, cv.graph, vmap, emap)
