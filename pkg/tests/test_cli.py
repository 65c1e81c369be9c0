import json

import numpy as np
import pytest

from b3rep import cli
from b3rep import scanner as sc


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- check ------------------------------------------------------------------------

def test_check_d2_unitarizable(capsys):
    code, out, _ = run(capsys, "check", "--d", "2", "--angles", "0,0.5", "--format", "json")
    doc = json.loads(out)
    assert code == cli.EXIT_OK
    assert doc["verdict"] == "unitarizable"
    assert doc["mu_closed"] == pytest.approx([0.75])
    for key in ("spectrum", "gamma", "q_values", "mu_closed", "verdict"):
        assert key in doc


def test_check_d2_negative(capsys):
    code, out, _ = run(capsys, "check", "--d", "2", "--angles", "0,0.0833333")
    assert code == cli.EXIT_NEGATIVE
    assert "not_unitarizable" in out


def test_check_boundary_and_not_simple(capsys):
    code, out, _ = run(capsys, "check", "--d", "2", "--angles", f"0,{1 / 6 + 1e-9!r}")
    assert code == cli.EXIT_NEGATIVE and "boundary" in out
    code, out, _ = run(capsys, "check", "--d", "2", "--angles", f"0,{1 / 6!r}")
    assert code == cli.EXIT_NEGATIVE and "not_simple" in out


def test_check_d3_deep(capsys):
    code, out, _ = run(capsys, "check", "--d", "3", "--angles", "0,0.333333333333,0.666666666667",
                       "--deep", "--format", "json")
    doc = json.loads(out)
    assert code == cli.EXIT_OK
    assert doc["verdict"] == "unitarizable"
    assert doc["mu_numeric"][0][1:] == pytest.approx([4 / 9, 4 / 9], abs=1e-6)
    assert doc["signature"] == [3, 0]
    assert "U_A" in doc["matrices"]
    assert "delta" in doc and "residuals" in doc


def test_check_d4_needs_branch(capsys):
    code, _, err = run(capsys, "check", "--d", "4", "--angles", "0,0.1,0.35,0.7")
    assert code == cli.EXIT_USAGE and "gamma-branch" in err


def test_check_d4_delta_root_identifies_branch(capsys):
    code, out, _ = run(capsys, "check", "--d", "4", "--angles", "0,0.13,0.41,0.77",
                       "--delta-root", "0", "--format", "json")
    doc = json.loads(out)
    assert code in (cli.EXIT_OK, cli.EXIT_NEGATIVE)
    assert doc["gamma"]["branch"] in (0, 1)
    assert "mu_numeric" in doc


@pytest.mark.parametrize("argv", [
    ["check", "--d", "7", "--angles", "0,0.5"],
    ["check", "--d", "2", "--angles", "0,abc"],
    ["check", "--d", "2", "--angles", "0,0.5,0.7"],
    ["check", "--d", "2", "--angles", "0,0"],
    ["check", "--d", "2"],
    ["check", "--d", "5", "--angles", "0,0.1,0.2,0.3,0.4", "--gamma-branch", "5"],
    ["scan", "--d", "2", "--resolution", "8"],
    ["scan", "--d", "4", "--format", "pgm", "--gamma-branch", "0"],
    ["scan", "--d", "4"],
    ["scan", "--d", "2", "--jobs", "0"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == cli.EXIT_USAGE


# -- scan -------------------------------------------------------------------------

def test_scan_csv_header_and_rows(capsys):
    code, out, _ = run(capsys, "scan", "--d", "3", "--resolution", "16")
    lines = out.splitlines()
    assert code == cli.EXIT_OK
    assert lines[0] == "t2,t3,branch,mu_12,mu_13,verdict"
    assert len(lines) == 1 + 16 * 16
    t2, t3, branch = lines[1].split(",")[:3]
    assert float(t2) == 1 / 32 and float(t3) == 1 / 32 and branch == ""


def test_scan_d5_csv(capsys):
    code, out, _ = run(capsys, "scan", "--d", "5", "--gamma-branch", "3", "--resolution", "40", "--seed", "9")
    lines = out.splitlines()
    assert code == cli.EXIT_OK
    assert lines[0] == "t2,t3,t4,t5,branch,mu_12,mu_13,mu_14,mu_15,verdict"
    assert len(lines) == 41
    assert all(line.split(",")[4] == "3" for line in lines[1:])


def test_scan_deterministic_across_jobs(tmp_path):
    outs = []
    for jobs in ("1", "3", "1"):
        p = tmp_path / f"scan{len(outs)}.csv"
        assert cli.main(["scan", "--d", "3", "--resolution", "64", "--jobs", jobs, "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_scan_pgm_d3(tmp_path):
    p = tmp_path / "region.pgm"
    assert cli.main(["scan", "--d", "3", "--resolution", "48", "--format", "pgm", "--out", str(p)]) == 0
    img = sc.read_pgm(p.read_bytes())
    assert img.shape == (48, 48)
    assert set(np.unique(img)) <= set(sc.PGM_LEVELS.values())
    # the diagonal t2 = t3 is excluded
    assert all(img[k, k] == sc.PGM_LEVELS[sc.CellClass.EXCLUDED] for k in range(48))
    lines = sc.read_pgm((tmp_path / "region.lines.pgm").read_bytes())
    assert lines.shape == (48, 48) and np.any(lines == 0)


def test_scan_json_d2(capsys):
    code, out, _ = run(capsys, "scan", "--d", "2", "--resolution", "120", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["counts"]["black"] == 80


# -- unitarize ----------------------------------------------------------------------

def test_unitarize_round_trip(tmp_path):
    p = tmp_path / "u.json"
    assert cli.main(["unitarize", "--d", "2", "--angles", "0,0.5", "--out", str(p)]) == 0
    doc = json.loads(p.read_text())
    res = cli.verify_unitary_document(doc)
    assert max(res.values()) <= 1e-8
    U = cli.mfromjson(doc["U_A"])
    assert U.shape == (2, 2)


def test_unitarize_d3(tmp_path):
    p = tmp_path / "u3.json"
    assert cli.main(["unitarize", "--d", "3", "--angles", "0,0.333333333333,0.666666666667",
                     "--out", str(p)]) == 0
    doc = json.loads(p.read_text())
    assert doc["residuals"]["braid"] <= 1e-8


def test_unitarize_refuses(capsys):
    code, _, err = run(capsys, "unitarize", "--d", "2", "--angles", "0,0.0833333")
    assert code == cli.EXIT_NEGATIVE
    assert "mu_1i" in err


def test_tampered_unitary_document_fails(tmp_path):
    p = tmp_path / "u.json"
    cli.main(["unitarize", "--d", "2", "--angles", "0,0.5", "--out", str(p)])
    doc = json.loads(p.read_text())
    doc["U_A"][0][0][0] += 1e-3
    with pytest.raises(cli.InconsistencyError):
        cli.verify_unitary_document(doc)


# -- verify ------------------------------------------------------------------------

def test_verify_d2(capsys):
    code, out, _ = run(capsys, "verify", "--d", "2", "--angles", "0,0.5", "--format", "json")
    doc = json.loads(out)
    assert code == cli.EXIT_OK
    assert all(p["passed"] for p in doc["properties"])


def test_verify_d4_branch_table(capsys):
    code, out, _ = run(capsys, "verify", "--d", "4", "--angles", "0,0.13,0.41,0.77",
                       "--gamma-branch", "0", "--format", "json")
    doc = json.loads(out)
    assert code == cli.EXIT_OK
    table = doc["branch_table"]
    assert len(table) == 4
    assert sorted(row["branch"] for row in table.values() if row["branch"] is not None) == [0, 1]


def test_verify_not_simple(capsys):
    code, out, _ = run(capsys, "verify", "--d", "2", "--angles", f"0,{1 / 6!r}")
    assert code == cli.EXIT_NEGATIVE
    assert "FAIL  is_simple" in out
    assert "skipped" in out
