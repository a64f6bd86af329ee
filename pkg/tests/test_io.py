from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from ripsmachine import io
from ripsmachine.corpus import golden_iet, random_system, shift_example, tripod_reduced
from ripsmachine.errors import DocumentError
from ripsmachine.rips import elementary_step, same_system

GOOD = """{
  "field": {"d": 0},
  "forest": {"trees": [{"vertices": ["0", "3"],
                        "edges": [{"id": "I", "from": "0", "to": "3", "len": "3"}]}]},
  "generators": [{"name": "a", "anchors": [["0", "I@1"], ["I@2", "3"]]}]
}
"""


def test_golden_document_roundtrips_byte_identically(tmp_path):
    path = tmp_path / "g.json"
    io.save(io.document_from_system(golden_iet(), {"provenance": "test"}), path)
    first = path.read_bytes()
    io.save(io.load(path), path)
    assert path.read_bytes() == first
    assert json.loads(first)["field"] == {"d": 5}


def test_load_minimal_document():
    doc = io.loads(GOOD)
    assert same_system(doc.system, shift_example())
    assert io.dumps(io.loads(io.dumps(doc))) == io.dumps(doc)


def _broken(path_fn):
    data = json.loads(GOOD)
    path_fn(data)
    return json.dumps(data, indent=2)


def test_zero_edge_length_is_located():
    text = _broken(lambda d: d["forest"]["trees"][0]["edges"][0].update(len="0"))
    with pytest.raises(DocumentError) as info:
        io.loads(text)
    err = info.value
    assert err.reason == "edge length must be positive"
    assert err.path == "$.forest.trees[0].edges[0].len"
    assert text.splitlines()[err.line - 1].strip().startswith('"len": "0"')


def test_distortion_names_the_pair():
    text = _broken(lambda d: d["generators"][0].update(anchors=[["0", "0"], ["I@2", "I@1"]]))
    with pytest.raises(DocumentError) as info:
        io.loads(text)
    assert info.value.path == "$.generators[0].anchors"
    assert "(0, I@2)" in info.value.reason and "(0, I@1)" in info.value.reason


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d["forest"]["trees"][0]["edges"][0].update(len="3/"), "$.forest.trees[0].edges[0].len"),
    (lambda d: d["forest"]["trees"][0]["edges"][0].update(len=1.5), "$.forest.trees[0].edges[0].len"),
    (lambda d: d["generators"][0]["anchors"][0].__setitem__(1, "I@7"), "$.generators[0].anchors[0][1]"),
    (lambda d: d["generators"][0]["anchors"][0].__setitem__(1, "nowhere"), "$.generators[0].anchors[0][1]"),
    (lambda d: d.update(extra=1), "$.extra"),
    (lambda d: d["field"].update(d=8), "$.field.d"),
    (lambda d: d.update(declarations={"independence": "maybe"}), "$.declarations.independence"),
    (lambda d: d.update(declarations={"independence": "certified"}), "$.declarations.depth"),
    (lambda d: d["generators"].append(dict(d["generators"][0])), "$.generators"),
])
def test_located_validation_errors(mutate, path):
    with pytest.raises(DocumentError) as info:
        io.loads(_broken(mutate))
    assert info.value.path == path and info.value.line is not None


def test_malformed_json_has_line():
    with pytest.raises(DocumentError) as info:
        io.loads('{\n  "field": {"d": 0},\n  oops\n}')
    assert info.value.line == 3


def test_declarations_roundtrip():
    data = json.loads(GOOD)
    data["declarations"] = {"independence": "certified", "depth": 20}
    doc = io.loads(json.dumps(data))
    assert doc.independence == "certified:20"
    assert json.loads(io.dumps(doc))["declarations"] == {"depth": 20, "independence": "certified"}


def test_subforest_systems_are_extracted():
    after = elementary_step(tripod_reduced()).after
    doc = io.loads(io.dumps(after))
    s = doc.system
    assert s.forest.n_trees == len(after.components)
    assert s.total_length() == after.total_length()
    assert s.associated_graph().index() == after.associated_graph().index()
    assert sorted(a.name for a in s.generators) == sorted(a.name for a in after.generators)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_documents_roundtrip(seed):
    s = random_system(random.Random(seed))
    text = io.dumps(s)
    again = io.loads(text)
    assert io.dumps(again) == text
    assert same_system(again.system, s)
