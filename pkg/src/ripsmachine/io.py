"""JSON documents for systems of isometries.

A document looks like::

    {
      "declarations": {"independence": "declared"},
      "field": {"d": 5},
      "forest": {"trees": [{"vertices": ["left", "right"],
                            "edges": [{"id": "I", "from": "left", "to": "right", "len": "1"}]}]},
      "generators": [{"name": "a", "domain": ["left", "I@1/2"],
                      "anchors": [["left", "I@1/2"], ["I@1/2", "right"]]}],
      "metadata": {"name": "shift", "provenance": "hand-written"},
      "version": 1
    }

Points are vertex ids or ``"edge@offset"``; scalars are strings in the
syntax of :func:`ripsmachine.scalar.parse_scalar` (plain JSON integers are
accepted on input).  :func:`dumps` writes sorted keys and canonical scalars,
so re-saving a saved document reproduces it byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DocumentError, RipsError
from .forest import Edge, Forest, Point
from .isometry import build_isometry
from .scalar import Field
from .system import System

__all__ = ["SystemDocument", "load", "loads", "save", "dumps", "document_from_system", "FORMAT_VERSION"]

FORMAT_VERSION = 1


@dataclass
class SystemDocument:
    system: System
    metadata: dict = field(default_factory=dict)

    @property
    def independence(self) -> str | None:
        return self.system.independence

    @property
    def name(self) -> str:
        return self.metadata.get("name", self.system.name)

    def to_json(self) -> dict:
        return _encode(self)


# -- position tracking ------------------------------------------------------------------

_WS = " \t\r\n"


def _positions(text: str) -> dict[str, int]:
    """Offset of every value in an already valid JSON text, keyed by path."""
    dec = json.JSONDecoder()
    out: dict[str, int] = {}

    def skip(i: int) -> int:
        while i < len(text) and text[i] in _WS:
            i += 1
        return i

    def walk(i: int, path: str) -> int:
        i = skip(i)
        out[path] = i
        ch = text[i]
        if ch == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = dec.raw_decode(text, skip(i))
                i = skip(i) + 1
                i = skip(walk(i, f"{path}.{key}"))
                if text[i] == "}":
                    return i + 1
                i += 1
        if ch == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            n = 0
            while True:
                i = skip(walk(i, f"{path}[{n}]"))
                n += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        _, end = dec.raw_decode(text, i)
        return end

    walk(0, "$")
    return out


class _Locator:
    def __init__(self, text: str | None):
        self.text = text
        self._pos = None

    def line(self, path: str) -> int | None:
        if self.text is None:
            return None
        if self._pos is None:
            self._pos = _positions(self.text)
        p = path
        while p not in self._pos and p != "$":
            cut = max(p.rfind("."), p.rfind("["))
            p = p[:cut] if cut > 0 else "$"
        pos = self._pos.get(p, 0)
        return self.text.count("\n", 0, pos) + 1

    def fail(self, path: str, message: str):
        raise DocumentError(message, path, self.line(path))


# -- decoding ---------------------------------------------------------------------------

_JSON_NAMES = {dict: "object", list: "array", str: "string"}


def _expect(loc: _Locator, value, kind, path: str, what: str):
    if not isinstance(value, kind) or (isinstance(value, bool) and kind is not bool):
        loc.fail(path, f"{what} must be a JSON {_JSON_NAMES.get(kind, kind.__name__)}")
    return value


def _scalar_text(loc: _Locator, value, path: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        loc.fail(path, "scalars must be strings (or integers)")
    return str(value)


def _decode(obj, loc: _Locator) -> SystemDocument:
    _expect(loc, obj, dict, "$", "document")
    known = {"version", "field", "forest", "generators", "declarations", "metadata"}
    for key in obj:
        if key not in known:
            loc.fail(f"$.{key}", f"unknown key {key!r}")
    version = obj.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        loc.fail("$.version", f"unsupported document version {version!r}")

    fobj = _expect(loc, obj.get("field", {"d": 0}), dict, "$.field", "field")
    d = fobj.get("d", 0)
    if isinstance(d, bool) or not isinstance(d, int):
        loc.fail("$.field.d", "field parameter d must be an integer")
    try:
        fld = Field(d)
    except ValueError as exc:
        loc.fail("$.field.d", str(exc))

    forest_obj = _expect(loc, obj.get("forest"), dict, "$.forest", "forest")
    trees_obj = _expect(loc, forest_obj.get("trees"), list, "$.forest.trees", "trees")
    trees = []
    for ti, t in enumerate(trees_obj):
        tp = f"$.forest.trees[{ti}]"
        _expect(loc, t, dict, tp, "tree")
        verts = _expect(loc, t.get("vertices"), list, f"{tp}.vertices", "vertices")
        for vi, v in enumerate(verts):
            _expect(loc, v, str, f"{tp}.vertices[{vi}]", "vertex id")
        edges = []
        for ei, e in enumerate(_expect(loc, t.get("edges", []), list, f"{tp}.edges", "edges")):
            ep = f"{tp}.edges[{ei}]"
            _expect(loc, e, dict, ep, "edge")
            for key in ("from", "to", "len"):
                if key not in e:
                    loc.fail(ep, f"edge is missing {key!r}")
            eid = e.get("id", f"e{ti}.{ei}")
            _expect(loc, eid, str, f"{ep}.id", "edge id")
            try:
                length = fld.parse(_scalar_text(loc, e["len"], f"{ep}.len"))
            except RipsError as exc:
                loc.fail(f"{ep}.len", str(exc))
            if length.sign() <= 0:
                loc.fail(f"{ep}.len", "edge length must be positive")
            edges.append(Edge(eid, str(e["from"]), str(e["to"]), length))
        trees.append((verts, edges))
        try:
            Forest([(verts, edges)], fld)
        except RipsError as exc:
            loc.fail(tp, str(exc))
    try:
        forest = Forest(trees, fld)
    except RipsError as exc:
        loc.fail("$.forest", str(exc))

    def point(value, path: str) -> Point:
        if isinstance(value, bool) or not isinstance(value, (str, int)):
            loc.fail(path, "points must be strings")
        try:
            return forest.parse_point(str(value))
        except RipsError as exc:
            loc.fail(path, str(exc))

    gens = []
    for gi, g in enumerate(_expect(loc, obj.get("generators", []), list, "$.generators", "generators")):
        gp = f"$.generators[{gi}]"
        _expect(loc, g, dict, gp, "generator")
        name = _expect(loc, g.get("name"), str, f"{gp}.name", "generator name")
        anchors_obj = _expect(loc, g.get("anchors"), list, f"{gp}.anchors", "anchors")
        anchors = []
        for ai, pair in enumerate(anchors_obj):
            ap = f"{gp}.anchors[{ai}]"
            if not isinstance(pair, list) or len(pair) != 2:
                loc.fail(ap, "an anchor is a [point, image] pair")
            anchors.append((point(pair[0], f"{ap}[0]"), point(pair[1], f"{ap}[1]")))
        domain = None
        if "domain" in g:
            dom = _expect(loc, g["domain"], list, f"{gp}.domain", "domain")
            pts = [point(v, f"{gp}.domain[{i}]") for i, v in enumerate(dom)]
            try:
                domain = forest.hull(pts)
            except RipsError as exc:
                loc.fail(f"{gp}.domain", str(exc))
        try:
            gens.append(build_isometry(forest, name, anchors, domain=domain))
        except RipsError as exc:
            loc.fail(f"{gp}.anchors", str(exc))

    decl = _expect(loc, obj.get("declarations", {}), dict, "$.declarations", "declarations")
    indep = decl.get("independence")
    if indep is None:
        independence = None
    elif indep == "declared":
        independence = "declared"
    elif indep == "certified":
        depth = decl.get("depth")
        if isinstance(depth, bool) or not isinstance(depth, int) or depth < 1:
            loc.fail("$.declarations.depth", "a certified declaration needs a positive integer depth")
        independence = f"certified:{depth}"
    else:
        loc.fail("$.declarations.independence", "independence must be \"declared\" or \"certified\"")
    meta = _expect(loc, obj.get("metadata", {}), dict, "$.metadata", "metadata")
    for key in ("name", "provenance"):
        if key in meta:
            _expect(loc, meta[key], str, f"$.metadata.{key}", key)
    try:
        s = System(forest, tuple(gens), independence=independence, name=meta.get("name", ""))
    except RipsError as exc:
        loc.fail("$.generators", str(exc))
    return SystemDocument(s, dict(meta))


# -- encoding ---------------------------------------------------------------------------

def document_from_system(s: System, metadata: dict | None = None) -> SystemDocument:
    """Wrap ``s``; a system living on part of a larger forest is first cut out of it."""
    meta = dict(metadata or {})
    if s.name and "name" not in meta:
        meta["name"] = s.name
    whole = s.forest.whole()
    if [k.sort_key for k in whole] == [k.sort_key for k in s.components]:
        return SystemDocument(s, meta)
    forest, to_new = s.forest.extract(s.components)
    gens = tuple(build_isometry(forest, a.name, [(to_new(p), to_new(q)) for p, q in a.anchors])
                 for a in s.generators)
    return SystemDocument(System(forest, gens, independence=s.independence, name=s.name), meta)


def _encode(doc: SystemDocument) -> dict:
    s = doc.system
    f = s.forest
    trees = []
    for tid in range(f.n_trees):
        trees.append({
            "vertices": list(f.tree_vertices(tid)),
            "edges": [{"id": e.id, "from": e.src, "to": e.dst, "len": e.length.render()}
                      for e in f.tree_edges(tid)],
        })
    gens = [{"name": a.name,
             "domain": [g.render() for g in a.domain.gens],
             "anchors": [[p.render(), q.render()] for p, q in a.anchors]}
            for a in s.generators]
    decl: dict = {}
    if s.independence == "declared":
        decl["independence"] = "declared"
    elif s.independence and s.independence.startswith("certified:"):
        decl["independence"] = "certified"
        decl["depth"] = int(s.independence.split(":", 1)[1])
    return {"version": FORMAT_VERSION, "field": {"d": f.field.d}, "forest": {"trees": trees},
            "generators": gens, "declarations": decl, "metadata": dict(doc.metadata)}


def dumps(doc: SystemDocument | System) -> str:
    if isinstance(doc, System):
        doc = document_from_system(doc)
    return json.dumps(_encode(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> SystemDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc.msg}", "$", exc.lineno) from None
    return _decode(obj, _Locator(text))


def load(path) -> SystemDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from None
    return loads(text)


def save(doc: SystemDocument | System, path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")
