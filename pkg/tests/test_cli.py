import json
import shutil

import pytest

from pvstrata.betaset import default_fixture_dir
from pvstrata.cli import main, parse_markdown_rows


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("case_id,nonempty", [(1, 16), (2, 13)])
def test_report_counts(capsys, case_id, nonempty):
    code, out, _ = run(capsys, "report", "--case", str(case_id), "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == {1: 49, 2: 81}[case_id]
    assert sum(r["status"] == "NonEmpty" for r in doc["rows"]) == nonempty
    assert [r["index"] for r in doc["rows"]] == sorted(r["index"] for r in doc["rows"])


def test_report_row29_and_discrepancy_note(capsys):
    _, out, _ = run(capsys, "report", "--case", "1", "--format", "json")
    assert json.loads(out)["rows"][28]["orbit"] == "Ex2(k)"
    _, out, _ = run(capsys, "report", "--case", "2", "--format", "json")
    notes = json.loads(out)["notes"]
    assert any("omits 74" in n for n in notes)


@pytest.mark.parametrize("fmt", ["markdown", "json"])
def test_report_is_deterministic(capsys, fmt):
    first = run(capsys, "report", "--case", "2", "--format", fmt)[1]
    second = run(capsys, "report", "--case", "2", "--format", fmt)[1]
    assert first == second


@pytest.mark.parametrize("case_id", ["1", "2"])
def test_markdown_and_json_carry_the_same_rows(capsys, case_id):
    rows_json = json.loads(run(capsys, "report", "--case", case_id, "--format", "json")[1])["rows"]
    rows_md = parse_markdown_rows(run(capsys, "report", "--case", case_id)[1])
    assert rows_md == rows_json


def test_verify_case1(capsys):
    code, out, _ = run(capsys, "verify", "case1", "--jobs", "4")
    assert code == 0
    assert "case1: 49/49 strata certified, 0 failed checks" in out


@pytest.fixture
def fixture_copy(tmp_path):
    dest = tmp_path / "fixtures"
    shutil.copytree(default_fixture_dir(), dest)
    return dest


def test_verify_corrupted_weight_names_beta(capsys, fixture_copy):
    path = fixture_copy / "certificates_case2.json"
    recs = json.loads(path.read_text())
    rec = next(r for r in recs if r["index"] == 79)
    rec["oneps"] = [0, 0, 0, 0, 0, 0, 1, -1]
    path.write_text(json.dumps(recs))
    code, out, _ = run(capsys, "verify", "case2", "--fixtures", str(fixture_copy), "--jobs", "4")
    assert code == 1
    failing = [ln for ln in out.splitlines() if ln.startswith("FAIL")]
    assert failing and all("beta79" in ln for ln in failing)
    assert "case2: 80/81 strata certified" in out


def test_verify_missing_fixture_is_usage_error(capsys, fixture_copy):
    (fixture_copy / "nonempty_case1.json").unlink()
    code, out, err = run(capsys, "verify", "case1", "--fixtures", str(fixture_copy))
    assert code == 2 and "error" in err and out == ""


def test_verify_malformed_catalog_is_usage_error(capsys, fixture_copy):
    path = fixture_copy / "catalog_case1.txt"
    path.write_text(path.read_text().replace("1 12 Empty", "1 12 Bogus"))
    code, _, err = run(capsys, "verify", "case1", "--fixtures", str(fixture_copy))
    assert code == 2 and "index 12" in err


def test_find_oneps_beta10(capsys):
    for token in ("x131", "3"):
        code, out, _ = run(capsys, "find-oneps", "--case", "1", "10", token)
        assert code == 0 and out.startswith("1-PS [")
        assert "pairing with beta: 0" in out


def test_find_oneps_beta29_infeasible(capsys):
    code, out, _ = run(capsys, "find-oneps", "--case", "1", "29")
    assert code == 0 and out.splitlines()[0] == "infeasible"
    assert "Farkas multipliers" in out


def test_find_oneps_case2_beta79(capsys):
    code, out, _ = run(capsys, "find-oneps", "--case", "2", "79", "15")
    assert code == 0 and "weight list [1]" in out


def test_find_oneps_rejects_coordinate_outside_z(capsys):
    code, _, err = run(capsys, "find-oneps", "--case", "1", "10", "1")
    assert code == 2 and "not in Z" in err
    code, _, err = run(capsys, "find-oneps", "--case", "1", "10", "99")
    assert code == 2


def write_point(tmp_path, text):
    p = tmp_path / "point.txt"
    p.write_text(text)
    return str(p)


# A occupies serials 5 6 8 9 and B serials 14 15 17 18 for stratum 29
SPLIT = "5 = 1\n9 = 1\n14 = 1\n18 = -1\n"
ROOT2 = "5 = 1\n9 = 1\n15 = 1\n17 = 2\n"


def test_classify_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "classify", "--case", "1", "29", write_point(tmp_path, SPLIT))
    assert code == 0 and out.strip() == "disc class 1: split Q x Q"
    code, out, _ = run(capsys, "classify", "--case", "1", "29", write_point(tmp_path, ROOT2))
    assert code == 0 and out.strip() == "disc class 2: Q(sqrt 2)"


def test_classify_diagonal_pencil_is_split(capsys, tmp_path):
    # det(u I + v diag(1, -2)) = (u + v)(u - 2v) has two rational roots
    code, out, _ = run(capsys, "classify", "--case", "1", "29", write_point(tmp_path, "5 = 1\n9 = 1\n14 = 1\n18 = -2\n"))
    assert code == 0 and out.strip() == "disc class 1: split Q x Q"


def test_classify_case2(capsys, tmp_path):
    # x341 = x561 = 1 in slot 1, x362 = x452 = 1 in slot 2
    code, out, _ = run(capsys, "classify", "--case", "2", "67", write_point(tmp_path, "10 = 1\n15 = 1\n27 = 1\n28 = 1\n"))
    assert code == 0 and out.strip() == "disc class -1: Q(sqrt -1)"


def test_classify_zero_point(capsys, tmp_path):
    code, _, err = run(capsys, "classify", "--case", "1", "29", write_point(tmp_path, "# nothing set\n"))
    assert code == 2 and "not semistable" in err


def test_classify_bad_input(capsys, tmp_path):
    assert run(capsys, "classify", "--case", "1", "4", write_point(tmp_path, SPLIT))[0] == 2
    assert run(capsys, "classify", "--case", "1", "29", write_point(tmp_path, "5 = x\n"))[0] == 2
    assert run(capsys, "classify", "--case", "1", "29", write_point(tmp_path, "40 = 1\n"))[0] == 2
    assert run(capsys, "classify", "--case", "1", "29", str(tmp_path / "absent.txt"))[0] == 2
