"""The Rips Machine on systems of isometries.

One elementary step keeps the points lying in at least two domains of
``A^{+-1}`` and replaces every generator by its restrictions between the
connected components of what is kept.  The step is also decomposed into a
preliminary move (erasing everything outside the convex hull of the kept
part) followed by one move per erased arc, each of which either splits a
vertex or splits an edge of the associated graph.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .errors import BudgetExhausted, InvariantError, PreconditionError
from .forest import Forest, Point, Subtree
from .graph import GraphMorphism, MultiGraph
from .isometry import PartialIsometry
from .scalar import Scalar
from .system import (Letter, System, TrajectoryView, inverse_letter, render_letter, trajectory_tree,
                     trusted_system)

__all__ = [
    "Move", "RipsStep", "RipsRun", "ReducedReport", "LimitGraphView",
    "kept_components", "restrict_system", "elementary_step", "step_morphism",
    "is_reduced", "run", "limit_graph_view", "same_system",
]

log = logging.getLogger(__name__)

SPLIT_VERTEX = "SplitVertex"
SPLIT_EDGE = "SplitEdge"


# -- restriction machinery ---------------------------------------------------------------

def merge_subtrees(forest: Forest, pieces: Sequence[Subtree]) -> list[Subtree]:
    """Connected components of a finite union of subtrees, canonically sorted."""
    # closed subtrees have a connected union iff their intersection graph is connected
    comps = sorted({p for p in pieces if p is not None}, key=lambda k: k.sort_key)
    parent = list(range(len(comps)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(comps)), 2):
        if comps[i].tree == comps[j].tree and find(i) != find(j) \
                and forest.intersect(comps[i], comps[j]) is not None:
            parent[find(i)] = find(j)
    groups: dict[int, list[Subtree]] = {}
    for i, k in enumerate(comps):
        groups.setdefault(find(i), []).append(k)
    return sorted((forest.union_hull(g) for g in groups.values()), key=lambda k: k.sort_key)


def kept_by_component(s: System) -> dict[int, list[Subtree]]:
    """Pieces of ``F'`` grouped by the index of the component of ``s`` holding them."""
    f = s.forest
    by_comp: dict[int, list[Subtree]] = {}
    for z in s.letters:
        d = s.domain(z)
        by_comp.setdefault(s.component_index(d), []).append(d)
    out = {}
    for i, doms in sorted(by_comp.items()):
        pieces = []
        for x, y in itertools.combinations(doms, 2):
            k = f.intersect(x, y)
            if k is not None:
                pieces.append(k)
        if pieces:
            out[i] = merge_subtrees(f, pieces)
    return out


def kept_components(s: System) -> list[Subtree]:
    """Components of ``{P : P lies in the domains of two distinct letters}``."""
    return sorted((k for ks in kept_by_component(s).values() for k in ks), key=lambda k: k.sort_key)


def restrict_system(s: System, comps: Sequence[Subtree]) -> tuple[System, dict]:
    """All non-empty restrictions of the generators of ``s`` between ``comps``.

    Every member of ``comps`` must lie in a component of ``s``.  Returns the
    new system and a map ``new name -> parent name in s``.  Restrictions of
    the same original generator are named ``origin`` when unique, and
    ``origin.1``, ``origin.2``, ... otherwise.
    """
    comps = sorted(comps, key=lambda k: k.sort_key)
    position = {k: i for i, k in enumerate(comps)}
    inside: dict[int, list[Subtree]] = {}
    for k in comps:
        inside.setdefault(s.component_index(k), []).append(k)
    raw = []
    for a in sorted(s.generators, key=lambda g: g.name):
        targets = inside.get(s.component_index(a.range), [])
        for k0 in inside.get(s.component_index(a.domain), []):
            head = a.restrict(k0, None)
            if head is None:
                continue
            for k1 in targets:
                r = head.restrict(None, k1)
                if r is not None:
                    raw.append((r, a.name, k0, k1))
    by_origin: dict[str, list] = {}
    for item in raw:
        by_origin.setdefault(item[0].origin, []).append(item)
    gens, parents = [], {}
    memo = dict(position)
    for origin in sorted(by_origin):
        group = sorted(by_origin[origin], key=lambda it: (it[0].domain.sort_key, it[0].range.sort_key))
        for i, (r, parent, k0, k1) in enumerate(group, 1):
            name = origin if len(group) == 1 else f"{origin}.{i}"
            g = r.renamed(name, origin)
            gens.append(g)
            parents[name] = parent
            memo[g.domain] = position[k0]
            memo[g.range] = position[k1]
    return trusted_system(s.forest, tuple(gens), tuple(comps), s.independence, s.name, memo), parents


def same_system(s: System, t: System) -> bool:
    """Structural equality of marked systems (names ignored)."""
    if tuple(c.sort_key for c in s.components) != tuple(c.sort_key for c in t.components):
        return False
    return sorted(a.signature for a in s.generators) == sorted(a.signature for a in t.generators)


def containment_morphism(fine: System, coarse: System, fine_parent: dict, coarse_parent: dict) -> GraphMorphism:
    """Graph map sending a component to the component containing it and a
    restriction to the generator of ``coarse`` it restricts.

    ``*_parent`` map generator names to a common ancestor naming.
    """
    gf, gc = fine.associated_graph(), coarse.associated_graph()
    vmap = {}
    for i, c in enumerate(fine.components):
        vmap[fine.vertex_id(i)] = coarse.vertex_id(coarse.component_index(c))
    f = fine.forest
    emap = {}
    for a in fine.generators:
        hits = [b.name for b in coarse.generators
                if coarse_parent[b.name] == fine_parent[a.name]
                and f.includes(b.domain, a.domain)]
        if len(hits) != 1:
            raise InvariantError(f"restriction {a.name} has {len(hits)} candidate parents")
        emap[a.name] = hits[0]
    return GraphMorphism(gf, gc, vmap, emap)


# -- elementary step ---------------------------------------------------------------------

@dataclass
class Move:
    kind: str
    arc: tuple[Point, Point]
    length: Scalar
    letter: Letter | None
    component: Subtree
    sides: tuple[Subtree, Subtree]

    def to_json(self) -> dict:
        out = {"type": self.kind, "arc_len": self.length.render(),
               "arc": [self.arc[0].render(), self.arc[1].render()]}
        if self.letter is not None:
            out["letter"] = render_letter(self.letter)
        return out


@dataclass
class RipsStep:
    before: System
    after: System
    parents: dict                 # generator of ``after`` -> generator of ``before``
    hull_components: tuple        # convex hulls of F' inside each component
    peripheral_length: Scalar     # length erased by the preliminary move
    moves: list[Move]
    stage_components: list        # components after each arc move

    @property
    def is_fixed_point(self) -> bool:
        return same_system(self.before, self.after)

    @cached_property
    def _stages(self) -> list[tuple[System, dict]]:
        out = [restrict_system(self.before, self.hull_components)]
        for comps in self.stage_components:
            out.append(restrict_system(self.before, comps))
        return out

    @property
    def hull(self) -> System:
        """System after the preliminary move."""
        return self._stages[0][0]

    @property
    def stages(self) -> list[System]:
        """Systems after each arc move; the last one equals ``after``."""
        return [st for st, _ in self._stages[1:]] or [self.hull]

    def stage_graphs(self) -> list[MultiGraph]:
        return [self.before.associated_graph()] + [st.associated_graph() for st, _ in self._stages]

    def factor_morphisms(self) -> list[GraphMorphism]:
        """``[tau_0, tau_1, ..., tau_n]`` with ``tau_0: Gamma_H -> Gamma`` and
        ``tau_i: Gamma_i -> Gamma_{i-1}``."""
        prev, prev_par = self.before, {a.name: a.name for a in self.before.generators}
        out = []
        for st, par in self._stages:
            out.append(containment_morphism(st, prev, par, prev_par))
            prev, prev_par = st, par
        return out


def _split_letter(s: System, comp: Subtree, leaf: Subtree, other: Subtree, current) -> Letter | None:
    """A letter of the current stage whose domain meets both sides of the arc."""
    f = s.forest
    home = s.component_index(comp)
    for z in s.letters:
        m = s.letter_map(z)
        if s.component_index(m.domain) != home:
            continue
        head = m.restrict(comp, None)
        if head is None:
            continue
        far = s.component_index(m.range)
        for k1 in current:
            if s.component_index(k1) != far:
                continue
            r = head.restrict(None, k1)
            if r is not None and f.intersect(r.domain, leaf) is not None \
                    and f.intersect(r.domain, other) is not None:
                return z
    return None


def elementary_step(s: System) -> RipsStep:
    f = s.forest
    grouped = kept_by_component(s)
    kept = sorted((k for ks in grouped.values() for k in ks), key=lambda k: k.sort_key)
    after, parents = restrict_system(s, kept)

    work: dict[Subtree, list[Subtree]] = {}
    for i, pieces in grouped.items():
        work[f.union_hull(pieces)] = list(pieces)
    hulls = tuple(sorted(work, key=lambda k: k.sort_key))
    peripheral = s.total_length() - sum((f.length(h) for h in hulls), f.field.zero)

    moves: list[Move] = []
    stage_comps: list[tuple] = []
    while True:
        splittable = sorted((c for c, ps in work.items() if len(ps) >= 2), key=lambda k: k.sort_key)
        if not splittable:
            break
        comp = splittable[0]
        pieces = work.pop(comp)
        leaf = None
        for k in sorted(pieces, key=lambda x: x.sort_key):
            rest = f.union_hull([x for x in pieces if x != k])
            if f.intersect(k, rest) is None:
                leaf, other = k, rest
                break
        if leaf is None:
            raise InvariantError("no separable component while decomposing the erased part")
        p, q = f.bridge(leaf, other)
        letter = _split_letter(s, comp, leaf, other, list(work) + [comp])
        work[leaf] = [leaf]
        work[other] = [x for x in pieces if x != leaf]
        moves.append(Move(SPLIT_EDGE if letter is not None else SPLIT_VERTEX, (p, q),
                          f.distance(p, q), letter, comp, (leaf, other)))
        stage_comps.append(tuple(sorted(work, key=lambda k: k.sort_key)))
    if set(work) != set(kept):
        raise InvariantError("move decomposition does not end at the output of the step")
    return RipsStep(s, after, parents, hulls, peripheral, moves, stage_comps)


def step_morphism(step: RipsStep) -> GraphMorphism:
    """``tau: Gamma' -> Gamma`` of one elementary step."""
    ident = {a.name: a.name for a in step.before.generators}
    return containment_morphism(step.after, step.before, step.parents, ident)


# -- reducedness ---------------------------------------------------------------------------

@dataclass
class ReducedReport:
    status: str                  # "Reduced" | "NotReduced" | "UnknownAtDepth"
    depth: int
    condition: str | None = None  # which condition failed: "extremal" | "trajectory"
    letter: Letter | None = None
    point: Point | None = None
    trajectory: TrajectoryView | None = None

    @property
    def reduced(self) -> bool:
        return self.status == "Reduced"

    def to_json(self) -> dict:
        out = {"status": self.status, "depth": self.depth}
        if self.condition:
            out["condition"] = self.condition
        if self.letter is not None:
            out["letter"] = render_letter(self.letter)
        if self.point is not None:
            out["point"] = self.point.render()
        if self.trajectory is not None:
            out["trajectory_vertices"] = len(self.trajectory.points)
        return out


def representative_points(s: System) -> list[Point]:
    """Breakpoints, tree vertices and one point per open cell, inside the forest."""
    f = s.forest
    marks = s.breakpoints()
    out: list[Point] = []
    for tid in sorted({c.tree for c in s.components}):
        verts, cells = f.cells(tid, marks)
        for p in verts + [c.mid for c in cells]:
            if s.contains(p):
                out.append(p)
    return sorted(set(out), key=lambda p: p.sort_key)


def _reaches(s: System, p: Point, depth: int, counter: list, budget: int | None) -> bool:
    """Depth-first search for an admissible word of length ``depth`` at ``p``."""
    stack = [(p, None, 0)]
    while stack:
        q, last, k = stack.pop()
        if k == depth:
            return True
        back = inverse_letter(last) if last is not None else None
        for z in reversed(s.letters):
            if z == back:
                continue
            counter[0] += 1
            if budget is not None and counter[0] > budget:
                raise BudgetExhausted("trajectory search budget exhausted")
            r = s.act(q, z)
            if r is not None:
                stack.append((r, z, k + 1))
    return False


def is_reduced(s: System, depth: int = 8, budget: int | None = 200_000, step: RipsStep | None = None) -> ReducedReport:
    """Check both reducedness conditions.

    Extremal points of every domain must survive one step (checked exactly);
    trajectory trees must be infinite, which is checked up to ``depth`` at
    representative points.  ``Reduced`` therefore means reduced at that depth.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    step = step or elementary_step(s)
    nxt = step.after
    for z in s.letters:
        for g in s.domain(z).gens:
            if not nxt.contains(g):
                return ReducedReport("NotReduced", depth, "extremal", z, g)
    counter = [0]
    try:
        for p in representative_points(s):
            if not _reaches(s, p, depth, counter, budget):
                return ReducedReport("NotReduced", depth, "trajectory", None, p,
                                     trajectory_tree(s, p, depth, budget))
    except BudgetExhausted:
        return ReducedReport("UnknownAtDepth", depth)
    return ReducedReport("Reduced", depth)


def extremal_condition(s: System, nxt: System) -> bool:
    """Exact check that extremal points of all domains of ``s`` lie in ``nxt``."""
    return all(nxt.contains(g) for z in s.letters for g in s.domain(z).gens)


# -- iteration ---------------------------------------------------------------------------------

@dataclass
class StageStats:
    step: int
    components: int
    edges: int
    graph_index: int
    total_length: Scalar
    max_diameter: Scalar
    reduced: str | None = None

    def to_json(self) -> dict:
        out = {"step": self.step, "components": self.components, "edges": self.edges,
               "graph_index": self.graph_index, "total_length": self.total_length.render(),
               "max_component_diameter": self.max_diameter.render()}
        if self.reduced is not None:
            out["reduced"] = self.reduced
        return out


@dataclass
class RipsRun:
    systems: list[System]
    steps: list[RipsStep]
    halted: bool
    stats: list[StageStats]
    budget_exhausted: bool = False
    reason: str = ""

    @property
    def last(self) -> System:
        return self.systems[-1]

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def halt_step(self) -> int | None:
        return len(self.steps) if self.halted else None

    def graph_indices(self) -> list[int]:
        return [st.graph_index for st in self.stats]

    def to_json(self) -> dict:
        per_step = []
        for k, st in enumerate(self.stats):
            row = st.to_json()
            row["moves"] = [m.to_json() for m in self.steps[k - 1].moves] if k > 0 else []
            if k > 0:
                row["peripheral_len"] = self.steps[k - 1].peripheral_length.render()
            per_step.append(row)
        return {"halted": self.halted, "halt_step": self.halt_step,
                "budget_exhausted": self.budget_exhausted, "reason": self.reason,
                "steps": per_step}


def _stats(k: int, s: System, reduced: str | None = None) -> StageStats:
    return StageStats(k, len(s.components), len(s.generators), s.associated_graph().index(),
                      s.total_length(), s.max_component_diameter(), reduced)


def run(s0: System, max_steps: int, budget_breakpoints: int | None = None,
        check_reduced_depth: int | None = None) -> RipsRun:
    """Iterate the machine until ``S_{k+1} = S_k`` or ``max_steps`` steps are computed.

    Index monotonicity is asserted at every step.  With ``check_reduced_depth``
    each stage is tested for reducedness and, when reduced, the step must
    consist of edge splits only, keep the graph index, and the next stage must
    satisfy the extremal-point condition.
    """
    if max_steps < 0:
        raise PreconditionError("max_steps must be >= 0")
    systems = [s0]
    steps: list[RipsStep] = []
    red = is_reduced(s0, check_reduced_depth).status if check_reduced_depth else None
    if red == "Reduced" and any(v <= 1 for v in s0.associated_graph().valences().values()):
        raise InvariantError("reduced system with a vertex of valence <= 1")
    stats = [_stats(0, s0, red)]
    halted = False
    exhausted = False
    reason = ""
    for k in range(max_steps):
        cur = systems[-1]
        step = elementary_step(cur)
        if step.is_fixed_point:
            halted = True
            reason = f"S_{k + 1} = S_{k}"
            break
        nxt = step.after
        i_prev, i_next = stats[-1].graph_index, nxt.associated_graph().index()
        if i_next > i_prev:
            raise InvariantError(f"graph index increased from {i_prev} to {i_next} at step {k + 1}")
        red_next = None
        if check_reduced_depth:
            rep = is_reduced(nxt, check_reduced_depth)
            red_next = rep.status
            if stats[-1].reduced == "Reduced":
                if any(m.kind != SPLIT_EDGE for m in step.moves) or step.peripheral_length.sign() != 0:
                    raise InvariantError(f"reduced system performed a non edge-split move at step {k + 1}")
                if i_next != i_prev:
                    raise InvariantError(f"reduced system changed graph index at step {k + 1}")
                if rep.condition == "extremal":
                    raise InvariantError(f"extremal-point condition not inherited at step {k + 1}")
            if red_next == "Reduced" and any(v <= 1 for v in nxt.associated_graph().valences().values()):
                raise InvariantError(f"reduced system with a vertex of valence <= 1 at step {k + 1}")
        steps.append(step)
        systems.append(nxt)
        stats.append(_stats(k + 1, nxt, red_next))
        log.debug("step %d: %d components, %d edges, index %d", k + 1,
                  stats[-1].components, stats[-1].edges, stats[-1].graph_index)
        if budget_breakpoints is not None:
            nbp = sum(len(a.domain.gens) for a in nxt.generators) + sum(len(c.gens) for c in nxt.components)
            if nbp > budget_breakpoints:
                exhausted = True
                reason = f"breakpoint budget {budget_breakpoints} exceeded at step {k + 1}"
                break
    else:
        if max_steps > 0:
            reason = f"stopped after {max_steps} steps"
    if not halted and not exhausted and max_steps > 0 and not reason:
        reason = f"stopped after {max_steps} steps"
    return RipsRun(systems, steps, halted, stats, exhausted, reason)


# -- limit graph ------------------------------------------------------------------------------

@dataclass
class LimitGraphView:
    graph: MultiGraph
    stage: int
    exact: bool
    morphisms: list[GraphMorphism]   # tau_hat_k : view -> Gamma_k, k = 0..stage
    warning: str = ""

    @property
    def index(self) -> int:
        return self.graph.index()


def limit_graph_view(r: RipsRun, stage: int | None = None) -> LimitGraphView:
    """``Gamma_n`` of a halted run (exactly the limit graph) or ``Gamma_k`` of a
    chosen stage as an approximation."""
    if stage is None:
        if not r.halted:
            raise PreconditionError("run did not halt; choose a stage for the approximation")
        stage = len(r.systems) - 1
    if not 0 <= stage < len(r.systems):
        raise PreconditionError(f"stage {stage} outside the run")
    exact = r.halted and stage == len(r.systems) - 1
    target = r.systems[stage]
    g = target.associated_graph()
    morphisms = [GraphMorphism.identity(g)]
    ident = {a.name: a.name for a in target.generators}
    acc = GraphMorphism.identity(g)
    for k in range(stage, 0, -1):
        tau = step_morphism(r.steps[k - 1])
        acc = acc.then(tau)
        morphisms.append(acc)
    morphisms.reverse()
    warning = "" if exact else f"stage-{stage} approximation: the limit graph is only the inverse limit"
    if g.index() > r.stats[0].graph_index:
        raise InvariantError("limit graph view has larger index than Gamma_0")
    return LimitGraphView(g, stage, exact, morphisms, warning)
