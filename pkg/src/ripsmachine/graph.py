"""Finite oriented multigraphs: core, index, morphisms and DOT output.

Loops and parallel edges are allowed.  A loop contributes two to the valence
of its vertex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Hashable, Mapping

from .errors import MorphismError

__all__ = ["GEdge", "MultiGraph", "GraphMorphism", "morphism_index_check"]


@dataclass(frozen=True)
class GEdge:
    id: Hashable
    src: Hashable
    dst: Hashable
    label: str = ""


@dataclass
class MultiGraph:
    vertices: dict[Hashable, Any] = field(default_factory=dict)
    edges: dict[Hashable, GEdge] = field(default_factory=dict)

    @classmethod
    def build(cls, vertices, edges) -> MultiGraph:
        """``vertices``: ids or ``(id, payload)``; ``edges``: ``(id, src, dst[, label])``."""
        g = cls()
        for v in vertices:
            if isinstance(v, tuple):
                g.vertices[v[0]] = v[1]
            else:
                g.vertices[v] = None
        for e in edges:
            g.add_edge(*e)
        return g

    def add_edge(self, eid, src, dst, label: str = "") -> None:
        if eid in self.edges:
            raise ValueError(f"duplicate edge id {eid!r}")
        if src not in self.vertices or dst not in self.vertices:
            raise ValueError(f"edge {eid!r} has a missing endpoint")
        self.edges[eid] = GEdge(eid, src, dst, label or str(eid))

    def valence(self, v) -> int:
        return sum((e.src == v) + (e.dst == v) for e in self.edges.values())

    def valences(self) -> dict:
        val = {v: 0 for v in self.vertices}
        for e in self.edges.values():
            val[e.src] += 1
            val[e.dst] += 1
        return val

    def subgraph(self, vertices, edges) -> MultiGraph:
        g = MultiGraph({v: self.vertices[v] for v in self.vertices if v in vertices}, {})
        for eid, e in self.edges.items():
            if eid in edges:
                g.edges[eid] = e
        return g

    def components(self) -> list[tuple[set, set]]:
        """Connected components as ``(vertex set, edge set)`` pairs."""
        adj: dict = {v: [] for v in self.vertices}
        for e in self.edges.values():
            adj[e.src].append((e.dst, e.id))
            adj[e.dst].append((e.src, e.id))
        seen: set = set()
        out = []
        for v in self.vertices:
            if v in seen:
                continue
            vs, es = {v}, set()
            todo = [v]
            seen.add(v)
            while todo:
                u = todo.pop()
                for w, eid in adj[u]:
                    es.add(eid)
                    if w not in seen:
                        seen.add(w)
                        vs.add(w)
                        todo.append(w)
            out.append((vs, es))
        return out

    def core(self) -> MultiGraph:
        """Largest subgraph without vertices of valence 0 or 1."""
        val = self.valences()
        incident: dict = {v: [] for v in self.vertices}
        for e in self.edges.values():
            incident[e.src].append(e.id)
            if e.dst != e.src:
                incident[e.dst].append(e.id)
        alive_v = set(self.vertices)
        alive_e = set(self.edges)
        queue = deque(v for v in self.vertices if val[v] <= 1)
        while queue:
            v = queue.popleft()
            if v not in alive_v or val[v] > 1:
                continue
            alive_v.discard(v)
            for eid in incident[v]:
                if eid in alive_e:
                    alive_e.discard(eid)
                    e = self.edges[eid]
                    other = e.dst if e.src == v else e.src
                    val[other] -= 1
                    if other in alive_v and val[other] <= 1:
                        queue.append(other)
        return self.subgraph(alive_v, alive_e)

    def index(self) -> int:
        """Sum over components of ``max(0, 2(#E - #V))``."""
        return sum(max(0, 2 * (len(es) - len(vs))) for vs, es in self.components())

    def vertex_indices(self) -> dict:
        return {v: k - 2 for v, k in self.valences().items()}

    def core_index(self) -> int:
        """Sum of ``valence - 2`` over the vertices of the core."""
        return sum(k - 2 for k in self.core().valences().values())

    def to_dot(self, name: str = "G") -> str:
        def q(x) -> str:
            return '"' + str(x).replace('"', '\\"') + '"'

        lines = [f"digraph {q(name)} {{"]
        for v in sorted(self.vertices, key=str):
            payload = self.vertices[v]
            label = str(v) if payload is None else str(payload)
            lines.append(f"  {q(v)} [label={q(label)}];")
        for eid in sorted(self.edges, key=str):
            e = self.edges[eid]
            lines.append(f"  {q(e.src)} -> {q(e.dst)} [label={q(e.label)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"vertices": len(self.vertices), "edges": len(self.edges), "index": self.index()}


@dataclass
class GraphMorphism:
    source: MultiGraph
    target: MultiGraph
    vmap: Mapping
    emap: Mapping

    def check(self) -> None:
        for v in self.source.vertices:
            if self.vmap.get(v) not in self.target.vertices:
                raise MorphismError(f"vertex {v!r} is not mapped to a target vertex")
        for eid, e in self.source.edges.items():
            t = self.target.edges.get(self.emap.get(eid))
            if t is None:
                raise MorphismError(f"edge {eid!r} is not mapped to a target edge")
            if (t.src, t.dst) != (self.vmap[e.src], self.vmap[e.dst]):
                raise MorphismError(f"edge {eid!r} is mapped to {t.id!r} without respecting incidence")

    def injective_on_edges(self) -> bool:
        images = [self.emap[e] for e in self.source.edges]
        return len(images) == len(set(images))

    def then(self, other: GraphMorphism) -> GraphMorphism:
        """``other`` after ``self``."""
        return GraphMorphism(self.source, other.target,
                             {v: other.vmap[w] for v, w in self.vmap.items()},
                             {e: other.emap[f] for e, f in self.emap.items()})

    @classmethod
    def identity(cls, g: MultiGraph) -> GraphMorphism:
        return cls(g, g, {v: v for v in g.vertices}, {e: e for e in g.edges})


def morphism_index_check(tau: GraphMorphism) -> tuple[bool, int, int]:
    """Return ``(injective on edges, i(source), i(target))`` after checking incidence."""
    tau.check()
    return tau.injective_on_edges(), tau.source.index(), tau.target.index()
