"""Partial isometries between closed subtrees of a finite forest.

An isometry is stored by the images of the extremal points of its domain.
Distance preservation on those anchors is the whole validity check: in a
0-hyperbolic space a distance preserving map on a finite set extends uniquely
to an isometry of the convex hulls.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DistortionError, DomainError, ForestError
from .forest import Forest, Point, Subtree

__all__ = ["PartialIsometry", "build_isometry", "compose", "compose_word"]


@dataclass(frozen=True)
class PartialIsometry:
    """Isometry ``domain -> range``; ``anchors`` pairs each domain generator
    with its image.

    ``origin`` names the generator of the initial system this map was
    obtained from by restriction (the map's own name when it is original).
    """

    name: str
    domain: Subtree
    range: Subtree
    anchors: tuple[tuple[Point, Point], ...]
    origin: str | None = None
    forest: Forest = field(compare=False, repr=False, hash=False, default=None)

    def __post_init__(self):
        if self.origin is None:
            object.__setattr__(self, "origin", self.name)

    @property
    def signature(self) -> tuple:
        """Name-free identity used for structural comparisons."""
        return (self.origin, self.domain.sort_key,
                tuple((p.sort_key, q.sort_key) for p, q in self.anchors))

    def _image_of_gen(self, g: Point) -> Point:
        for p, q in self.anchors:
            if p == g:
                return q
        raise KeyError(g)

    def contains(self, p: Point) -> bool:
        return self.forest.contains(self.domain, p)

    def apply(self, p: Point) -> Point:
        f = self.forest
        if len(self.anchors) == 1:
            (a, a_img), = self.anchors
            if p != a:
                raise DomainError(f"{p.render()} is not in dom({self.name})")
            return a_img
        try:
            tree = f.tree_of(p)
        except ForestError:
            raise DomainError(f"{p.render()} is not in dom({self.name})") from None
        if tree != self.domain.tree:
            raise DomainError(f"{p.render()} is not in dom({self.name})")
        for (a, a_img), (b, b_img) in itertools.combinations(self.anchors, 2):
            if f.on_arc(p, a, b):
                return f.point_along(a_img, b_img, f.distance(a, p))
        raise DomainError(f"{p.render()} is not in dom({self.name})")

    def inverse(self) -> PartialIsometry:
        anchors = tuple(sorted(((q, p) for p, q in self.anchors), key=lambda pq: pq[0].sort_key))
        return PartialIsometry(self.name, self.range, self.domain, anchors, self.origin, self.forest)

    def renamed(self, name: str, origin: str | None = None) -> PartialIsometry:
        return PartialIsometry(name, self.domain, self.range, self.anchors,
                               origin if origin is not None else self.origin, self.forest)

    def pull_back(self, k: Subtree | None) -> Subtree | None:
        """``{P in dom : P.a in k}``."""
        r = self.forest.intersect(self.range, k)
        if r is None:
            return None
        inv = self.inverse()
        return self.forest.hull(inv.apply(g) for g in r.gens)

    def restrict(self, k0: Subtree | None = None, k1: Subtree | None = None) -> PartialIsometry | None:
        """Restriction to points of ``k0`` sent into ``k1`` (``None`` = no constraint)."""
        f = self.forest
        dom = self.domain if k1 is None else self.pull_back(k1)
        if dom is None:
            return None
        if k0 is not None:
            dom = f.intersect(dom, k0)
            if dom is None:
                return None
        if dom == self.domain:
            return self
        return _from_domain(self, dom)

    def __repr__(self):
        return f"PartialIsometry({self.name}: {self.domain.render()} -> {self.range.render()})"


def _from_domain(a: PartialIsometry, dom: Subtree, name: str | None = None) -> PartialIsometry:
    anchors = tuple((g, a.apply(g)) for g in dom.gens)
    rng = a.forest.hull(q for _, q in anchors)
    return PartialIsometry(name or a.name, dom, rng, anchors, a.origin, a.forest)


def build_isometry(forest: Forest, name: str, anchors: Sequence[tuple[Point, Point]],
                   domain: Subtree | None = None, origin: str | None = None) -> PartialIsometry:
    """Validate anchor data and return the partial isometry it determines.

    ``anchors`` may list more points than the extremal ones; the domain is
    their hull and must equal ``domain`` when that is given.
    """
    anchors = list(anchors)
    if not anchors:
        raise DistortionError(f"isometry {name!r}: empty domain")
    srcs = [p for p, _ in anchors]
    dsts = [q for _, q in anchors]
    try:
        hull_src = forest.hull(srcs)
    except ForestError as exc:
        raise DistortionError(f"isometry {name!r}: domain anchors span several components ({exc})") from None
    try:
        forest.hull(dsts)
    except ForestError as exc:
        raise DistortionError(f"isometry {name!r}: image anchors span several components ({exc})") from None
    if domain is not None and hull_src != domain:
        raise DistortionError(f"isometry {name!r}: anchors do not cover the declared domain")
    for (p1, q1), (p2, q2) in itertools.combinations(anchors, 2):
        d1 = forest.distance(p1, p2)
        d2 = forest.distance(q1, q2)
        if d1 != d2:
            raise DistortionError(
                f"isometry {name!r}: anchor pair ({p1.render()}, {p2.render()}) has distance {d1} "
                f"but images ({q1.render()}, {q2.render()}) have distance {d2}",
                pair=((p1, q1), (p2, q2)))
    image = {}
    for p, q in anchors:
        image.setdefault(p, q)
    probe = PartialIsometry(name, hull_src, hull_src, tuple((p, image[p]) for p in sorted(image, key=lambda x: x.sort_key)),
                            origin, forest)
    gen_anchors = tuple((g, probe.apply(g)) for g in hull_src.gens)
    return PartialIsometry(name, hull_src, forest.hull(q for _, q in gen_anchors), gen_anchors, origin, forest)


def compose(u: PartialIsometry | None, v: PartialIsometry | None, name: str | None = None) -> PartialIsometry | None:
    """``u`` followed by ``v`` (right action: ``P(uv) = (Pu)v``); ``None`` if empty."""
    if u is None or v is None:
        return None
    f = u.forest
    mid = f.intersect(u.range, v.domain)
    if mid is None:
        return None
    inv = u.inverse()
    anchors = tuple(sorted(((inv.apply(x), v.apply(x)) for x in mid.gens), key=lambda pq: pq[0].sort_key))
    # isometries carry extremal points to extremal points
    dom = Subtree(u.domain.tree, tuple(p for p, _ in anchors))
    rng = f.hull(q for _, q in anchors)
    return PartialIsometry(name or f"{u.name}.{v.name}", dom, rng, anchors, None, f)


def compose_word(maps: Sequence[PartialIsometry]) -> PartialIsometry | None:
    """Compose a sequence of maps left to right."""
    if not maps:
        raise ValueError("compose_word needs at least one map")
    acc = maps[0]
    for m in maps[1:]:
        acc = compose(acc, m)
        if acc is None:
            return None
    return acc
