"""Indices of systems, the index lemma for subtree coverings, the finite forest
integral, classification of runs and the interval exchange frontend."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InvariantError, PreconditionError, TripleOverlapError
from .forest import Edge, Forest, Point, Subtree
from .isometry import build_isometry
from .rips import RipsRun, elementary_step, is_reduced, kept_components, run as rips_run
from .scalar import Field, Scalar
from .system import CertificateReport, System, independence_certificate, render_letter

__all__ = [
    "PointIndexRecord", "IndexReport", "Classification",
    "singular_points", "system_index", "index_surface_lemma_check", "finite_forest_integral",
    "rough_bound", "classify", "iet_to_system", "independence_established",
]


@dataclass(frozen=True)
class PointIndexRecord:
    point: Point
    valence: int
    omega_valence: int
    letters: tuple = ()

    @property
    def index(self) -> int:
        return self.omega_valence - 2

    def to_json(self) -> dict:
        return {"point": self.point.render(), "valence": self.valence,
                "omega_valence": self.omega_valence, "index": self.index,
                "letters": [render_letter(z) for z in self.letters]}


def independence_established(s: System) -> bool:
    return bool(s.independence) and (s.independence == "declared" or s.independence.startswith("certified"))


def is_pseudo_surface_forest(s: System) -> bool:
    """Every point lies in at least two domains."""
    kept = kept_components(s)
    return [k.sort_key for k in kept] == [c.sort_key for c in s.components]


def singular_points(s: System, omega: System | None = None) -> list[PointIndexRecord]:
    """Points lying in three or more domains, with their valences.

    ``omega`` is a system whose forest is the limit set (the final stage of a
    halted run); it defaults to ``s`` itself, which must then cover every
    point twice.  Letters of ``omega`` are restrictions of letters of ``s``
    with disjoint domains, so counting them gives ``#{z : P.z in Omega}``.
    """
    target = s if omega is None else omega
    if not is_pseudo_surface_forest(target):
        raise PreconditionError("some point lies in fewer than two domains; the system is not pseudo-surface")
    f = target.forest
    letters = target.letters
    doms = {z: target.domain(z) for z in letters}
    found: set[Point] = set()
    for x, y, z in itertools.combinations(letters, 3):
        k = f.intersect(f.intersect(doms[x], doms[y]), doms[z])
        if k is None:
            continue
        if not k.is_point:
            raise TripleOverlapError(
                f"domains of {render_letter(x)}, {render_letter(y)}, {render_letter(z)} share the arc {k.render()}",
                letters=(x, y, z), witness=k)
        found.add(k.gens[0])
    out = []
    for p in sorted(found, key=lambda q: q.sort_key):
        at = tuple(z for z in letters if f.contains(doms[z], p))
        base = s.valence(p) if omega is not None else len(at)
        out.append(PointIndexRecord(p, base, len(at), at))
    return out


@dataclass
class IndexReport:
    method: str
    value: int | None = None
    bound: int | None = None
    graph_index: int | None = None
    stage: int = 0
    conditional: bool = False
    cross_check: bool | None = None
    singular: list = field(default_factory=list)

    def to_json(self) -> dict:
        idx = {"method": self.method}
        if self.value is not None:
            idx["value"] = self.value
        if self.bound is not None:
            idx["bound"] = self.bound
        out = {"index": idx, "graph_index": self.graph_index, "stage": self.stage,
               "conditional": self.conditional,
               "singular_points": [r.to_json() for r in self.singular]}
        if self.cross_check is not None:
            out["cross_check"] = self.cross_check
        return out


def system_index(s: System, run: RipsRun | None = None, max_steps: int = 50) -> IndexReport:
    """``i(S)``: exact when the run halted, otherwise the graph index of the last stage as a bound.

    On a halted run the limit set is the last forest and the sum of
    ``v - 2`` over its singular points is exact.  Under independence it must
    agree with the index of the last graph; a disagreement raises
    :class:`InvariantError`.  Without an independence declaration the value is
    still exact but the cross-check is only reported.
    """
    if run is None:
        run = rips_run(s, max_steps)
    last = run.last
    gi = last.associated_graph().index()
    stage = len(run.systems) - 1
    conditional = not independence_established(s)
    if not run.halted:
        return IndexReport(f"stage-{stage} bound", bound=gi, graph_index=gi, stage=stage,
                           conditional=conditional)
    recs = singular_points(s, omega=last)
    value = sum(max(0, r.index) for r in recs)
    ok = value == gi
    if not ok and not conditional:
        raise InvariantError(f"index {value} of the limit set differs from the graph index {gi}")
    return IndexReport("halted-exact", value=value, graph_index=gi, stage=stage,
                       conditional=conditional, cross_check=ok, singular=recs)


# -- covering lemma --------------------------------------------------------------------------

def index_surface_lemma_check(forest: Forest, k: Subtree, ks: Sequence[Subtree]) -> int:
    """``sum_P (v(P) - 2)`` for a covering of the finite tree ``k`` by ``ks``.

    ``v(P)`` counts the members of ``ks`` containing ``P``.  The hypotheses
    (every point covered at least twice, triple intersections at most one
    point) are verified; the sum then equals ``len(ks) - 2``.
    """
    for x in ks:
        if x is None or x.tree != k.tree or not forest.includes(k, x):
            raise PreconditionError(f"{x.render() if x else 'empty'} is not a subtree of {k.render()}")
    for (i, x), (j, y), (l, z) in itertools.combinations(list(enumerate(ks)), 3):
        w = forest.intersect(forest.intersect(x, y), z)
        if w is not None and not w.is_point:
            raise TripleOverlapError(f"subtrees {i}, {j}, {l} share the arc {w.render()}",
                                     letters=(i, j, l), witness=w)
    marks = set(k.gens)
    for x in ks:
        marks.update(x.gens)
    verts, cells = forest.cells(k.tree, marks)
    total = 0
    for c in cells:
        if not forest.contains(k, c.mid):
            continue
        v = sum(1 for x in ks if forest.contains(x, c.mid))
        if v < 2:
            raise PreconditionError(f"point {c.mid.render()} is covered {v} time(s)")
    for p in verts:
        if not forest.contains(k, p):
            continue
        v = sum(1 for x in ks if forest.contains(x, p))
        if v < 2:
            raise PreconditionError(f"point {p.render()} is covered {v} time(s)")
        total += v - 2
    return total


def finite_forest_integral(s: System) -> Scalar:
    """Lebesgue integral of ``v_S - 2`` over the forest of ``s``."""
    f = s.forest
    total = f.field.zero
    marks = s.breakpoints()
    for tid in sorted({c.tree for c in s.components}):
        _, cells = f.cells(tid, marks)
        for c in cells:
            if s.contains(c.mid):
                total = total + (s.valence(c.mid) - 2) * c.length
    return total


def rough_bound(s: System | int) -> int:
    n = s if isinstance(s, int) else len(s.generators)
    return n * (2 * n - 1) * (2 * n - 2) ** 2 // 3


# -- classification ------------------------------------------------------------------------------

SURFACE = "SurfaceType"
LEVITT = "LevittEvidence"
MIXED = "MixedOrUnknown"


@dataclass
class Classification:
    label: str
    stage: int
    halted: bool
    max_component_diameter: Scalar
    index: IndexReport | None = None
    initial_graph_index: int = 0
    maximal_index: bool | None = None
    reduced: str | None = None
    certificate: CertificateReport | None = None
    window: int = 10
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"label": self.label, "stage": self.stage, "halted": self.halted,
               "max_component_diameter": self.max_component_diameter.render(),
               "initial_graph_index": self.initial_graph_index, "window": self.window,
               "notes": list(self.notes)}
        if self.maximal_index is not None:
            out["maximal_index"] = self.maximal_index
        if self.reduced is not None:
            out["reduced"] = self.reduced
        certs = {}
        if self.certificate is not None:
            certs["independence"] = self.certificate.to_json()
        if self.halted:
            certs["halt_step"] = self.stage
        out["certificates"] = certs
        if self.index is not None:
            out["index"] = self.index.to_json()["index"]
        return out


def levitt_evidence(diameters: Sequence[Scalar], window: int = 10) -> bool:
    """Maximal component diameters are non-increasing, positive, and halve over every window."""
    if window < 1 or len(diameters) <= window:
        return False
    if any(d.sign() <= 0 for d in diameters):
        return False
    if any(b > a for a, b in zip(diameters, diameters[1:])):
        return False
    return all(diameters[i + window] * 2 <= diameters[i] for i in range(len(diameters) - window))


def classify(s: System, run: RipsRun | None = None, depth: int = 10, max_steps: int = 50,
             window: int = 10) -> Classification:
    """Surface type iff the run halted; otherwise Levitt evidence or unknown."""
    if run is None:
        run = rips_run(s, max_steps)
    stage = len(run.systems) - 1
    dia = run.stats[-1].max_diameter
    g0 = run.stats[0].graph_index
    cert = None
    if depth >= 1:
        cert = independence_certificate(s, depth)
    if run.halted:
        idx = system_index(s, run)
        red = is_reduced(s, depth).status if depth >= 1 else None
        maximal = idx.value == g0
        notes = []
        if red == "Reduced" and not maximal:
            msg = f"reduced halted system has index {idx.value} below the graph index {g0}"
            if independence_established(s) or (cert is not None and cert.passes):
                raise InvariantError(msg)
            notes.append(msg)
        return Classification(SURFACE, stage, True, dia, idx, g0, maximal, red, cert, window, notes)
    diameters = [st.max_diameter for st in run.stats]
    label = LEVITT if levitt_evidence(diameters, window) else MIXED
    idx = system_index(s, run)
    notes = [f"no halt within {stage} steps" + (" (budget exhausted)" if run.budget_exhausted else "")]
    return Classification(label, stage, False, dia, idx, g0, None, None, cert, window, notes)


# -- interval exchanges ---------------------------------------------------------------------------

def iet_to_system(lengths: Sequence, perm: Sequence[int], field_: Field | None = None,
                  name: str = "") -> System:
    """System of an interval exchange on ``[0, sum(lengths)]``.

    Interval ``i`` (1-based, in top order) is sent to position ``perm[i-1]``
    in the bottom order.  Generators ``a_1..a_n`` translate closed intervals.
    """
    fld = field_ or Field(0)
    lens = [fld.coerce(x) for x in lengths]
    n = len(lens)
    if n == 0:
        raise PreconditionError("an interval exchange needs at least one interval")
    if any(x.sign() <= 0 for x in lens):
        raise PreconditionError("interval lengths must be positive")
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(1, n + 1)):
        raise PreconditionError(f"{perm} is not a permutation of 1..{n}")
    total = sum(lens, fld.zero)
    f = Forest([(["left", "right"], [Edge("I", "left", "right", total)])], fld)
    top = [fld.zero]
    for x in lens:
        top.append(top[-1] + x)
    order = sorted(range(n), key=lambda i: perm[i])
    bottom = {}
    pos = fld.zero
    for i in order:
        bottom[i] = pos
        pos = pos + lens[i]
    gens = []
    for i in range(n):
        a, b = f.edge_point("I", top[i]), f.edge_point("I", top[i + 1])
        c, d = f.edge_point("I", bottom[i]), f.edge_point("I", bottom[i] + lens[i])
        gens.append(build_isometry(f, f"a_{i + 1}", [(a, c), (b, d)]))
    return System(f, tuple(gens), name=name or f"iet-{n}")
