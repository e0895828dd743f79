import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from terpgeom.cli import PURITY_COLUMNS, parse_complex, parse_grid, run
from terpgeom.errors import ValidationError

ROOT = Path(__file__).resolve().parents[1]
FIX = str(ROOT / "fixtures" / "example3.json")


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def ok(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


def test_parse_helpers():
    assert parse_complex("1.5") == 1.5
    assert parse_complex("1,-2") == 1 - 2j
    with pytest.raises(ValidationError):
        parse_complex("a,b")
    assert parse_grid("r=0:2:5") == ("r", [0, 0.5, 1.0, 1.5, 2.0])
    assert parse_grid("t=1,1:1,1:1") == ("t", [1 + 1j])
    for bad in ["r0:1:2", "r=0:1", "r=0:1:x", "r=0:1:0"]:
        with pytest.raises(ValidationError):
            parse_grid(bad)


def test_spectrum():
    assert ok("spectrum", FIX) == {"spectrum": ["-5/4", "0", "5/4"]}
    assert ok("spectrum", "--example3", "--alpha1=-6/5", "--r", "1,1") == \
        {"spectrum": ["-6/5", "0", "6/5"]}


def test_pairing_and_hodge():
    assert ok("pairing", "--example3", "--r", "0.5", "--t", "0,1")["holds"] is True
    h = ok("hodge", FIX)
    assert h["dims"] == {"-2": 3, "-1": 2, "0": 2, "1": 1} and h["twisted"] is True
    assert ok("hodge", FIX, "--untwisted")["twisted"] is False


def test_pmhs():
    d = ok("pmhs", "--example3", "--r", "0.3")
    assert d["DcPMHS"]["passed"] and d["polarized"]["passed"]
    assert d["polarized"]["min_eigenvalues"]["H1:P0:H0,0"] > 0


def test_purity_single_and_grid():
    d = ok("purity", "--example3", "--r", "1")
    assert d["pure"] is True and d["signature"] == [3, 0]
    g = ok("purity", "--example3", "--grid", "r=0:2:3", "t=0:1:2")
    assert g["columns"] == list(PURITY_COLUMNS) and len(g["rows"]) == 6


def test_purity_csv_marks_wall():
    code, out, _ = call("purity", "--example3", "--grid", "r=0:2:3", "t=0:1:3", "--csv", "--jobs", "2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == list(PURITY_COLUMNS)
    wall = {(r["r_re"], r["t_re"]) for r in rows if r["pure"] == "false"}
    # rho = 0, 1/2, 2 puts the wall at |t| = 1, 1/4, 1
    assert wall == {("0", "1"), ("2", "1")}
    for r in rows:
        if r["pure"] == "false":
            assert r["sig_plus"] == "" and r["sig_minus"] == ""


def test_metric():
    d = ok("metric", "--example3", "--r", "1")
    assert d["tangent_metric"] == pytest.approx(8.0) and d["direction"] == "r"
    d = ok("metric", FIX, "--dC", json.dumps([[[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0] * 3] * 3]))
    assert d["tangent_metric"] == pytest.approx(2.0)
    assert "tangent_metric" not in ok("metric", FIX)


def test_curvature():
    d = ok("curvature", "--delta", json.dumps([[[1, 0], [0, 1]], [[0, 1], [-1, 0]]]))
    assert d["contraction"] == pytest.approx(-32.0) and d["phi"] == pytest.approx(-2.0)
    assert d["matrix_shape"] == [8, 8]


def test_phi_bound_and_horizontal_rank():
    d = ok("phi-bound", "--mu", "2", "--restarts", "4")
    assert d["phi_sup_estimate"] == pytest.approx(-2.0, abs=1e-6)
    assert ok("horizontal-rank", "--example3", "--r", "1")["horizontal_rank"] == 2
    # r = 0: Delta_1 with entries (2,1), (3,1), (3,2) and J Delta_1 symmetric
    assert ok("horizontal-rank", "--example3")["horizontal_rank"] == 2


def test_example3_verb():
    d = ok("example3", "--r", "1")
    assert d["metric_rr"] == pytest.approx(8.0) and d["metric_rr_expected"] == pytest.approx(40.0)
    assert d["pure"] and d["pure_expected"]


@pytest.mark.parametrize("argv", [
    ("spectrum",),
    ("spectrum", "/nonexistent.json"),
    ("metric", "--example3", "--t", "1"),
    ("curvature",),
    ("spectrum", "--example3", "--alpha1=-2"),
    ("purity", "--grid", "r=0:1:2", FIX),
])
def test_validation_exit_code(argv):
    code, out, err = call(*argv)
    assert code == 2 and out == ""
    assert json.loads(err)["error"]["code"] == "validation"


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert call("spectrum", str(p))[0] == 2
    p.write_text(json.dumps({"mu": 3}))
    assert call("spectrum", str(p))[0] == 2


def test_degenerate_exit_code(tmp_path):
    d = json.loads(Path(FIX).read_text())
    d["S"] = [[[0, 0]] * 3] * 3
    p = tmp_path / "flat.json"
    p.write_text(json.dumps(d))
    code, _, err = call("pmhs", str(p))
    assert code == 3 and json.loads(err)["error"]["code"] == "degenerate"


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        run(["nonsense"], io.StringIO(), io.StringIO())
    assert e.value.code == 2


def test_byte_identical_subprocess_runs():
    cmd = [sys.executable, "-m", "terpgeom.cli", "purity", "--example3", "--grid", "r=0:2:4",
           "t=0:1,1:3", "--csv"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.count(b"\n") == 13
