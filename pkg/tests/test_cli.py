"""Command-line behaviour. Golden outputs were checked by hand against the oracles
before being frozen; regenerate with DOTALG_UPDATE_GOLDEN=1 only after re-checking."""

import json
import os
from fractions import Fraction
from pathlib import Path

import pytest

from dotalg.cli import main
from dotalg.frontend import parse
from dotalg.inference import DyadicRational

from oracles import program_pq

GOLDEN = Path(__file__).resolve().parent / "golden"
UPDATE = os.environ.get("DOTALG_UPDATE_GOLDEN") == "1"

CASES = {
    "parse_has_disease": ["parse", "has_disease.dpp"],
    "parse_f2_json": ["parse", "f_family.dpp", "--fn", "f_2", "--json"],
    "graph_test": ["graph", "has_disease.dpp", "--fn", "test"],
    "graph_test_hypergraph": ["graph", "has_disease.dpp", "--fn", "test", "--hypergraph"],
    "decompose_test": ["decompose", "has_disease.dpp", "--fn", "test"],
    "decompose_test_json": ["decompose", "has_disease.dpp", "--fn", "test", "--mode", "exact", "--json"],
    "algebraise_f2": ["algebraise", "f_family.dpp", "--fn", "f_2"],
    "compile_has_disease": ["compile", "has_disease.dpp"],
    "infer_has_disease": ["infer", "has_disease.dpp", "--digits", "30"],
    "infer_f3": ["infer", "f_family.dpp", "--fn", "f_3", "--digits", "20"],
    "eval_has_disease": ["eval", "has_disease.dpp"],
    "oracle_has_disease": ["oracle", "has_disease.dpp"],
    "eval_booking": ["eval", "booking.cq", "--instance", "booking.csv", "--semiring", "bool"],
    "oracle_booking": ["oracle", "booking.cq", "--instance", "booking.csv"],
    "eval_attack_tree": ["eval", "attack_tree.json"],
    "oracle_attack_tree": ["oracle", "attack_tree.json"],
    "stats_has_disease": ["stats", "has_disease.dpp"],
    "stats_f8": ["stats", "f_family.dpp", "--fn", "f_8"],
}


@pytest.fixture
def run(samples, monkeypatch, capsys):
    monkeypatch.chdir(samples)

    def _run(argv):
        code = main(argv)
        out, err = capsys.readouterr()
        return code, out, err

    return _run


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(run, name):
    code, out, err = run(CASES[name])
    assert code == 0, err
    path = GOLDEN / f"{name}.txt"
    if UPDATE:
        path.write_text(out)
    assert out == path.read_text()


@pytest.mark.parametrize("name", ["infer_has_disease", "compile_has_disease", "stats_f8"])
def test_output_is_deterministic(run, name):
    assert run(CASES[name]) == run(CASES[name])


def test_infer_line(run):
    _, out, _ = run(CASES["infer_has_disease"])
    assert out.strip() == "5.05126081407e-05 +- 2^-31"


def test_infer_json_is_within_bound(run, has_disease_text):
    _, out, _ = run(["infer", "has_disease.dpp", "--digits", "30", "--json"])
    data = json.loads(out)
    p, q = program_pq(parse(has_disease_text))
    approx = DyadicRational.from_json(data["p_f"]).to_fraction()
    assert Fraction(data["error_bound"]) == Fraction(1, 2 ** 31)
    assert abs(approx - p / (p + q)) <= Fraction(1, 2 ** 31)


def test_eval_and_oracle_agree_on_samples(run):
    for pipeline, brute in [("eval_has_disease", "oracle_has_disease"), ("eval_booking", "oracle_booking"),
                            ("eval_attack_tree", "oracle_attack_tree")]:
        assert run(CASES[pipeline])[1] == run(CASES[brute])[1]


def test_compact_compile_is_one_line(run):
    _, out, _ = run(["compile", "has_disease.dpp", "--compact"])
    assert out.count("\n") == 1 and json.loads(out)["semiring"] == "rational"


@pytest.mark.parametrize("text, argv, code, error", [
    ("f() := g(", ["parse"], 2, "ParseError"),
    ("f(x) := x", ["infer", "--digits", "5"], 3, "PreconditionError"),
    ("f() := let x = flip(0); observe(x); x",
     ["infer", "--digits", "10", "--method", "truncated", "--precision-cap", "64"], 5, "UnresolvedAcceptance"),
])
def test_error_exit_codes(tmp_path, run, text, argv, code, error):
    path = tmp_path / "prog.dpp"
    path.write_text(text)
    got, out, err = run([argv[0], str(path), *argv[1:]])
    assert (got, out) == (code, "")
    assert json.loads(err)["error"] == error


def test_resource_limit_exit_code(run):
    code, _, err = run(["oracle", "f_family.dpp", "--fn", "f_8", "--max-unfold", "10"])
    assert code == 4 and json.loads(err)["error"] == "ResourceLimit"


def test_unknown_attack_tree_child(tmp_path, run):
    path = tmp_path / "tree.json"
    path.write_text(json.dumps({"root": "a", "nodes": {"a": {"gate": "OR", "children": ["zz"]}}}))
    code, _, err = run(["eval", str(path)])
    assert code == 3 and "zz" in json.loads(err)["message"]


def test_missing_file(run):
    code, _, err = run(["parse", "nowhere.dpp"])
    assert code == 2 and json.loads(err)["error"] == "ParseError"


def test_unresolved_reports_upper_bound(tmp_path, run):
    path = tmp_path / "prog.dpp"
    path.write_text("f() := let x = flip(0); observe(x); x")
    _, _, err = run(["infer", str(path), "--digits", "10", "--method", "truncated", "--precision-cap", "64"])
    assert "p_acc_upper_bound" in json.loads(err)
