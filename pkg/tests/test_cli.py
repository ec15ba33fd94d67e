import io
import json
import subprocess
import sys

from ramlab.cli import main


def run(argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def as_json(text):
    return json.loads(text)


def test_construct_h2_json():
    code, out = run(["construct", "h2", "--p", "3", "--n", "3", "--format", "json"])
    data = as_json(out)
    assert code == 0
    assert data["upper"]["values"] == ["1", "3", "9", "27"]
    assert data["lower"]["values"] == ["1", "7", "61", "547"]


def test_construct_table():
    code, out = run(["construct", "hgt2", "--p", "2", "--h", "3", "--n", "3", "--format", "table"])
    assert code == 0 and "69" in out


def test_validate_violation_exit_1():
    code, out = run(["breaks", "validate", "--p", "3", "--upper", "1,6"])
    assert code == 1
    assert as_json(out)["message"] == "p | a_1 while a_1 > p*a_0"
    code, _ = run(["breaks", "validate", "--p", "3", "--upper", "1,3,9,27"])
    assert code == 0


def test_convert_both_ways():
    code, out = run(["breaks", "convert", "--p", "3", "--upper", "1,3,9,27"])
    assert code == 0 and as_json(out)["values"] == ["1", "7", "61", "547"]
    code, out = run(["breaks", "convert", "--p", "3", "--lower", "1,7,61"])
    assert code == 0 and as_json(out)["values"] == ["1", "3", "9"]


def test_convert_divisibility_failure():
    code, _ = run(["breaks", "convert", "--p", "2", "--lower", "1,4"])
    assert code == 1


def test_phi_and_psi_stdin(monkeypatch):
    code, out = run(["breaks", "phi", "--p", "3", "--lower", "1,7,61", "--x", "7"])
    assert code == 0 and as_json(out)["phi"] == ["3"]
    payload = json.dumps({"p": "3", "kind": "upper", "values": ["1", "3", "9"]})
    code, out = run(["breaks", "psi", "--input", "-", "--x", "0,3"], stdin=payload, monkeypatch=monkeypatch)
    assert code == 0 and as_json(out)["psi"] == ["0", "7"]


def test_from_nu_and_irat():
    code, out = run(["breaks", "from-nu", "--p", "2", "--nu", "1,1,1"])
    data = as_json(out)
    assert code == 0
    assert data["upper"]["values"] == ["1", "3", "7"] and data["lower"]["values"] == ["1", "5", "21"]
    code, out = run(["breaks", "irat-check", "--p", "2", "--nu", "1,1,1"])
    assert code == 0 and as_json(out) == {"residuals": ["0", "0"], "ok": True}


def test_series_commands():
    code, out = run(["series", "compose", "--p", "2", "--f", "1,1", "--g", "1,1", "--trunc", "8"])
    assert code == 0 and [c[0] for c in as_json(out)["coeffs"]] == [1, 0, 0, 1, 0, 0, 0, 0]
    code, out = run(["series", "power", "--p", "2", "--f", "1,1", "--k", "4", "--trunc", "32"])
    coeffs = [c[0] for c in as_json(out)["coeffs"]]
    assert coeffs[0] == 1 and coeffs[15] == 1 and sum(coeffs) == 2
    code, out = run(["series", "breaks", "--p", "2", "--f", "1,1", "--trunc", "32", "--nmax", "3"])
    assert code == 0 and "15" in out and "Exceeded" in out


def test_heights_commands():
    code, out = run(["heights", "ht1", "--p", "2", "--lower", "3,5,9,17,33", "--window", "3"])
    assert code == 0 and as_json(out)["status"] == "consistent"
    code, out = run(["heights", "filtration", "--heights", "2,2,5", "--grid", "2,5,6"])
    data = as_json(out)
    assert code == 0
    assert [(r["rank"], r["multiplicity"]) for r in data["rows"]] == [(3, 2), (1, 1), (0, 0)]
    assert data["multiplicities"] == {"2": 2, "5": 1}


def test_oracle_run_is_byte_identical():
    argv = ["oracle", "run", "--p", "2", "--trials", "5", "--trunc", "64", "--seed", "42"]
    a, b = run(argv), run(argv)
    assert a == b and a[0] == 0
    last = json.loads(a[1].splitlines()[-1])
    assert last["summary"] and last["ok"]


def test_height_check():
    code, out = run(["oracle", "height-check", "--name", "ex-2not1"])
    assert code == 0


def test_usage_errors():
    assert run(["construct", "bogus", "--p", "2"])[0] == 2
    assert run(["breaks", "validate", "--p", "3"])[0] == 2
    assert run(["construct", "h2", "--p", "3", "--unknown"])[0] == 2


def test_precision_cap_env(monkeypatch):
    monkeypatch.setenv("RAMLAB_PRECISION_CAP", "8")
    code, _ = run(["construct", "hgt2", "--p", "2", "--h", "5/2", "--n", "4"])
    assert code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ramlab", "breaks", "phi", "--p", "3", "--lower", "1,7,61", "--x", "7"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["phi"] == ["3"]
