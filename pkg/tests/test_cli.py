import csv
import io
import json
from fractions import Fraction

import pytest

from kwbound.boolfunc import BooleanFunction, maj, urec_maj
from kwbound.certificates import DualCertificate
from kwbound.cli import run
from kwbound.commmatrix import CommMatrix, brec2_submatrix
from kwbound.report import CSV_COLUMNS, BoundReport, emit


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


# -- examples --------------------------------------------------------------------

def test_bound_maj1_lp():
    assert call("bound", "--family", "maj", "--l", "1", "--method", "lp") == (0, "9/2\n", "")


def test_verify_brec2_builtin():
    code, out, _ = call("verify", "--family", "brec", "--h", "2", "--builtin-cert")
    assert code == 0 and out.splitlines()[0] == "feasible, objective 20/1"


def test_table_paper():
    code, out, _ = call("table", "paper", "--format", "csv", "--omit-timing")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    got = {(r["family"], r["param"], r["method"]): r for r in rows}
    assert got[("maj", "1", "lp+clique")]["value_exact"] == "5/1"
    assert got[("maj", "1", "upper-formula")]["value_exact"] == "5/1"
    assert got[("maj", "2", "certificate")]["value_exact"] == "45/4"
    assert got[("maj", "2", "certificate")]["integral_bound"] == "12"
    urec = got[("urec", "2", "certificate")]
    assert Fraction(urec["value_exact"]) >= Fraction(74, 9) and urec["integral_bound"] == "9"
    assert got[("urec", "2", "upper-formula")]["value_exact"] == "9/1"
    brec = [r for r in rows if r["family"] == "brec"]
    assert brec[0]["value_exact"] == "20/1"
    assert Fraction(brec[1]["value_exact"]) >= Fraction(1504, 81)
    assert all(r["ms"] == "0" for r in rows)


# -- emit ------------------------------------------------------------------------

def rep(value):
    return BoundReport("urec", 2, "m", "certificate", value, 9, "verified", 0)


def test_emit_single_csv():
    lines = emit([rep(Fraction(74, 9))], "csv").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "urec,2,certificate,74/9,8.2222222222,9,verified,0"
    assert len(lines) == 2


def test_emit_empty_is_header_only():
    assert emit([], "csv") == ",".join(CSV_COLUMNS) + "\n"


def test_emit_json_mirrors_report():
    (doc,) = json.loads(emit([rep(Fraction(74, 9))], "json"))
    assert doc["value"] == "74/9" and doc["method"] == "certificate" and doc["param"] == 2


def test_emit_text_has_header():
    assert emit([rep(Fraction(1, 3))], "text").splitlines()[0].startswith("family")


# -- subcommands ------------------------------------------------------------------

def test_gen_function_roundtrip():
    code, out, _ = call("gen", "--family", "urec", "--h", "2")
    assert code == 0 and BooleanFunction.from_json(json.loads(out)) == urec_maj(2)


def test_gen_terms():
    code, out, _ = call("gen", "--family", "maj", "--l", "1", "--what", "minterms")
    assert json.loads(out)["terms"] == ["110", "101", "011"] or \
        sorted(json.loads(out)["terms"]) == ["011", "101", "110"]


def test_gen_formula():
    code, out, _ = call("gen", "--family", "urec", "--h", "3", "--what", "formula")
    assert code == 0 and json.loads(out)["size"] == 13


def test_gen_certificate_roundtrip():
    code, out, _ = call("gen", "--family", "brec", "--h", "2", "--what", "certificate")
    assert code == 0
    cert = DualCertificate.from_json(json.loads(out))
    assert cert.computed_objective() == 20
    assert cert.to_json() == json.loads(out)


def test_matrix_json_roundtrip():
    code, out, _ = call("matrix", "--family", "brec", "--h", "2")
    assert code == 0
    assert CommMatrix.from_json(json.loads(out)).same_as(brec2_submatrix()[0])


def test_matrix_csv_and_text():
    _, out, _ = call("matrix", "--family", "maj", "--l", "1", "--format", "csv")
    assert out.splitlines()[0] == ",100,010,001"
    _, out, _ = call("matrix", "--family", "maj", "--l", "1", "--format", "text")
    assert "1,2,3" in out


def test_matrix_from_function_file(tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps(maj(3).to_json()))
    code, out, _ = call("matrix", "--function", str(path), "--mode", "monotone")
    assert code == 0 and CommMatrix.from_json(json.loads(out)).shape == (3, 3)


def test_verify_cert_file_infeasible(tmp_path):
    code, out, _ = call("gen", "--family", "maj", "--l", "1", "--what", "certificate")
    doc = json.loads(out)
    doc["weights"][0]["value"] = "3"
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    code, out, _ = call("verify", "--cert", str(path))
    assert code == 1 and out.startswith("infeasible") and "violation" in out


def test_brute():
    assert call("brute", "--family", "maj", "--l", "1") == (0, "5\n", "")
    code, out, _ = call("brute", "--family", "maj", "--l", "1", "--cap", "4")
    assert code == 0 and out.startswith("exceeds cap")


def test_bound_multiple_methods_csv():
    code, out, _ = call("bound", "--family", "maj", "--l", "1", "--method", "lp",
                        "--method", "upper-formula", "--format", "csv", "--omit-timing")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["method"], r["value_exact"]) for r in rows] == [("lp", "9/2"),
                                                             ("upper-formula", "5/1")]


# -- determinism and exit codes -----------------------------------------------------

def test_deterministic_output():
    argv = ("bound", "--family", "maj", "--l", "1", "--method", "all", "--format", "json",
            "--omit-timing")
    assert call(*argv) == call(*argv)
    gen = ("gen", "--family", "maj", "--l", "2", "--what", "certificate")
    assert call(*gen) == call(*gen)


@pytest.mark.parametrize("argv", [
    ("bound", "--family", "maj", "--l", "1", "--method", "magic"),
    ("bound", "--family", "maj"),
    ("bound", "--family", "urec", "--h", "9"),
    ("verify", "--family", "maj", "--l", "1"),
    ("frobnicate",),
    ("--node-budget", "0", "bound", "--family", "maj", "--l", "1"),
    ("matrix",),
])
def test_invalid_input_exit_2(argv):
    code, _, err = call(*argv)
    assert code == 2 and err


def test_budget_exit_3():
    code, _, _ = call("--node-budget", "1", "verify", "--family", "maj", "--l", "2",
                      "--builtin-cert")
    assert code == 3
