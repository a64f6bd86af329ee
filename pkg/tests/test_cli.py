from __future__ import annotations

import json

import pytest

from ripsmachine import io
from ripsmachine.analysis import classify, iet_to_system, system_index
from ripsmachine.cli import cayley_report, main, render_json, step_report, validate_report
from ripsmachine.corpus import golden_iet, golden_lengths, hole_rotation, shift_example, tripod_reduced
from ripsmachine.rips import elementary_step, run
from ripsmachine.scalar import Field
from ripsmachine.system import cayley_view, independence_certificate


@pytest.fixture
def docs(tmp_path):
    out = {}
    for name, s in [("golden", golden_iet()), ("shift", shift_example()), ("tripod", tripod_reduced()),
                    ("hole", hole_rotation())]:
        p = tmp_path / f"{name}.json"
        io.save(s, p)
        out[name] = p
    return out


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_iet_then_index_gives_two(tmp_path, capsys):
    f = tmp_path / "f.json"
    code, _, _ = call(capsys, "iet", "--lengths", "(−1+sqrt(5))/2,(3−sqrt(5))/2", "--perm", "2,1",
                      "--field-d", "5", "-o", f)
    assert code == 0
    code, out, _ = call(capsys, "index", f, "--max-steps", 5)
    data = json.loads(out)
    assert code == 0 and data["index"] == {"method": "halted-exact", "value": 2}


def test_iet_matches_library(capsys):
    code, out, _ = call(capsys, "iet", "--lengths", "(-1+sqrt(5))/2,(3-sqrt(5))/2", "--perm", "2,1",
                        "--field-d", "5")
    lib = iet_to_system(golden_lengths(), [2, 1], Field(5))
    assert code == 0 and out == io.dumps(io.document_from_system(lib, {"provenance": "iet 2,1"}))


def test_random_iet_is_seeded(capsys):
    _, a, _ = call(capsys, "--seed", 4, "iet", "--n", 4)
    _, b, _ = call(capsys, "--seed", 4, "iet", "--n", 4)
    _, c, _ = call(capsys, "--seed", 5, "iet", "--n", 4)
    assert a == b and a != c


def test_run_on_shift_halts_with_index_zero(docs, capsys, tmp_path):
    rep = tmp_path / "r.json"
    code, out, _ = call(capsys, "run", docs["shift"], "--max-steps", 10, "--report", rep)
    assert code == 0 and json.loads(out) == {"halted": True, "halt_step": 2, "final_graph_index": 0}
    assert rep.read_text() == render_json(run(shift_example(), 10).to_json())


def test_validate_matches_library(docs, capsys):
    code, out, _ = call(capsys, "validate", docs["golden"], "--reduced-depth", 6)
    assert code == 0
    assert out == render_json(validate_report(io.load(docs["golden"]), 6))
    code, out, _ = call(capsys, "validate", docs["shift"], "--reduced-depth", 4)
    assert code == 1 and json.loads(out)["reduced"]["status"] == "NotReduced"


def test_validate_corrupt_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"forest": {"trees": [')
    code, out, err = call(capsys, "validate", bad)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "document"


def test_missing_file_is_input_error(tmp_path, capsys):
    code, _, err = call(capsys, "validate", tmp_path / "nope.json")
    assert code == 2 and "cannot read" in json.loads(err)["message"]


def test_graph_dot(docs, capsys, tmp_path):
    code, out, _ = call(capsys, "graph", docs["golden"])
    assert code == 0 and out == golden_iet().associated_graph().to_dot("golden-iet") + "\n"
    dot = tmp_path / "g.dot"
    code, out, _ = call(capsys, "graph", docs["golden"], "--dot", dot)
    assert json.loads(out) == {"vertices": 1, "edges": 2, "index": 2}
    assert dot.read_text().startswith("digraph")


def test_step_matches_library(docs, capsys, tmp_path):
    nxt = tmp_path / "n.json"
    code, out, _ = call(capsys, "step", docs["tripod"], "-o", nxt, "--moves")
    step = elementary_step(io.load(docs["tripod"]).system)
    assert code == 0 and out == render_json(step_report(step, True))
    assert io.load(nxt).system.total_length() == step.after.total_length()


def test_classify_and_cert_match_library(docs, capsys):
    s = io.load(docs["golden"]).system
    code, out, _ = call(capsys, "classify", docs["golden"], "--max-steps", 5, "--depth", 8)
    assert code == 0 and out == render_json(classify(s, run(s, 5), depth=8).to_json())
    code, out, _ = call(capsys, "cert", docs["golden"], "--depth", 12)
    assert code == 0 and out == render_json(independence_certificate(s, 12).to_json())
    code, out, _ = call(capsys, "cert", docs["golden"], "--depth", 30, "--budget", 5)
    assert code == 3 and json.loads(out or "{}") == {}


def test_index_matches_library(docs, capsys):
    s = io.load(docs["hole"]).system
    code, out, _ = call(capsys, "index", docs["hole"], "--max-steps", 4)
    assert code == 0 and out == render_json(system_index(s, run(s, 4)).to_json())


def test_budget_breakpoints_exit_code(docs, capsys):
    code, out, _ = call(capsys, "--budget-breakpoints", 12, "run", docs["hole"], "--max-steps", 20)
    assert code == 3 and json.loads(out)["budget_exhausted"]


def test_cayley(docs, capsys):
    s = io.load(docs["golden"]).system
    code, out, _ = call(capsys, "cayley", docs["golden"], "--point", "I@1/3", "--depth", 5)
    cv = cayley_view(s, s.forest.parse_point("I@1/3"), 5)
    assert code == 0 and out == render_json(cayley_report(cv))
    code, out, _ = call(capsys, "cayley", docs["golden"], "--point", "I@1/3", "--depth", 5, "--dot")
    assert out == cv.core.to_dot("cayley") + "\n"
    code, _, err = call(capsys, "cayley", docs["golden"], "--point", "I@9", "--depth", 5)
    assert code == 2 and json.loads(err)["error"] == "ForestError"


def test_reports_are_deterministic(docs, capsys):
    outs = {call(capsys, "classify", docs["tripod"], "--max-steps", 5, "--depth", 6)[1] for _ in range(2)}
    assert len(outs) == 1


def test_usage_error(capsys):
    assert main(["frobnicate"]) == 2
