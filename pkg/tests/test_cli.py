import json
import math
import subprocess
import sys

import jsonschema
import pytest

from symtc import __version__, cli
from symtc.schemas import ENVELOPE, SCHEMAS


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    doc = json.loads(out)
    jsonschema.validate(doc, ENVELOPE)
    assert doc["version"] == __version__ and "seed" in doc and "tol" in doc and "config" in doc
    return code, doc


def test_plan_rotation_example(capsys):
    code, doc = run_json(capsys, "plan", "--space", "rp:1", "--map", "complex", "--from", "1,0", "--to", "0,1")
    assert code == 0
    path = doc["path"]
    jsonschema.validate(path, SCHEMAS["path"])
    assert path["rule_id"] == 2 and len(path["samples"]) == 65
    assert path["max_step"] == pytest.approx((math.pi / 2) / 64)
    assert doc["config"]["N"] == 64 and doc["seed"] == 0 and doc["tol"] == 1e-9


def test_plan_diagonal_pair_exit_code(capsys):
    code, doc = run_json(capsys, "plan", "--space", "rp:1", "--map", "complex", "--from", "1,0", "--to=-2,0")
    assert code == cli.EXIT_SINGULAR
    assert doc["error"]["error"] == "DiagonalPair"


def test_plan_lift_lens_and_csv(capsys):
    code, doc = run_json(capsys, "plan", "--space", "lens:1,4", "--from", "1,0,0,0", "--to", "0,0,1,0", "-N", "8")
    assert code == 0 and doc["path"]["rule_id"] is None
    code, out = run(capsys, "plan", "--space", "lens:1,4", "--from", "1,0,0,0", "--to", "0,0,1,0", "-N", "8",
                    "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0] == "t,x0,x1,x2,x3" and len(lines) == 10
    code, doc = run_json(capsys, "plan", "--space", "lens:1,3", "--from", "1,0,0,0", "--to", "0,0,1,0")
    assert code == cli.EXIT_USAGE and doc["error"]["error"] == "Unsupported"


def test_plan_rejects_mismatched_space(capsys):
    code, doc = run_json(capsys, "plan", "--space", "rp:2", "--map", "complex", "--from", "1,0,0", "--to", "0,1,0")
    assert code == cli.EXIT_USAGE


def test_verify_psi_and_H(capsys):
    code, doc = run_json(capsys, "verify", "--target", "psi", "--r", "4", "--samples", "2000")
    assert code == 0 and doc["pass"] and len(doc["reports"]) == 2
    for rep in doc["reports"]:
        jsonschema.validate(rep, SCHEMAS["verification_report"])
    code, doc = run_json(capsys, "verify", "--target", "H", "--r", "6", "--samples", "300")
    assert code == 0 and len(doc["reports"]) == 5


def test_verify_quaternion_sym_fails(capsys):
    code, doc = run_json(capsys, "verify", "--target", "quaternion", "--relation", "SYM", "--samples", "500")
    assert code == cli.EXIT_FAIL and not doc["pass"]
    code, out = run(capsys, "verify", "--target", "quaternion", "--relation", "SYM", "--samples", "500",
                    "--format", "csv")
    assert out.splitlines()[0] == "name,check,max_residual,pass"


def test_verify_planners_and_lens(capsys):
    code, doc = run_json(capsys, "verify", "--target", "rotation", "--map", "poly:2", "--samples", "100")
    assert code == 0
    jsonschema.validate(doc["reports"][0], SCHEMAS["section_report"])
    code, doc = run_json(capsys, "verify", "--target", "lift", "--space", "lens:2,6", "--samples", "100")
    assert code == 0
    code, doc = run_json(capsys, "verify", "--target", "lens", "--space", "lens:1,3", "--samples", "500")
    assert code == 0 and {r["relation"] for r in doc["reports"]} == {"TCE", "AXIAL2"}
    code, doc = run_json(capsys, "verify", "--target", "hopf", "--map", "complex", "--samples", "500")
    assert code == 0 and len(doc["reports"]) == 3


def test_bounds_examples(capsys):
    code, doc = run_json(capsys, "bounds", "--space", "cp:3")
    jsonschema.validate(doc["bounds"], SCHEMAS["bound_report"])
    assert {"quantity": "TCS", "kind": "exact", "value": 7, "provenance": "cp-symmetric-tc"} in doc["bounds"]["facts"]
    code, doc = run_json(capsys, "bounds", "--space", "lens:5,8")
    facts = {(f["quantity"], f["kind"]): f["value"] for f in doc["bounds"]["facts"]}
    assert facts["TC", "exact"] == 22 and facts["TCS", "lower"] == 22 and facts["TCS", "upper"] == 23
    code, doc = run_json(capsys, "bounds", "--space", "rp:7")
    facts = {(f["quantity"], f["kind"]): f["value"] for f in doc["bounds"]["facts"]}
    assert (facts["TCS", "lower"], facts["TCS", "upper"]) == (9, 11)
    assert all(f["provenance"] for f in doc["bounds"]["facts"])
    code, out = run(capsys, "bounds", "--space", "rp:7", "--format", "csv")
    assert out.splitlines()[0] == "quantity,kind,value,provenance"


def test_bounds_data_file_via_env(capsys, tmp_path, monkeypatch):
    data = tmp_path / "emb.txt"
    data.write_text("EMB_DIM rp r=17 33 exact external:test\n")
    monkeypatch.setenv("SYMTC_KNOWN_RESULTS", str(data))
    code, doc = run_json(capsys, "bounds", "--space", "rp:17")
    facts = {(f["quantity"], f["kind"]): f["value"] for f in doc["bounds"]["facts"]}
    assert facts["TCS", "exact"] == 34
    assert doc["config"]["data"] == str(data)


def test_tables(capsys):
    code, doc = run_json(capsys, "table", "1")
    jsonschema.validate(doc["table"], SCHEMAS["table"])
    assert code == 0 and len(doc["table"]["columns"]) == 12 and doc["table"]["all_match"]
    code, doc = run_json(capsys, "table", "2", "--rho", "1..4")
    assert code == 0 and doc["table"]["all_match"]
    code, doc = run_json(capsys, "table", "2", "--rho", "5")
    assert doc["table"]["rows"][0]["extrapolated"]
    code, out = run(capsys, "table", "2", "--format", "csv")
    assert out.splitlines()[0].startswith("rho,n,quantity,column")
    code, doc = run_json(capsys, "table", "2", "--rho", "x..y")
    assert code == cli.EXIT_USAGE


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["plan", "--space", "rp:1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--target", "nope"])
    assert exc.value.code == 2
    code, doc = run_json(capsys, "bounds", "--space", "torus:2")
    assert code == 2


def test_identical_config_gives_identical_bytes(capsys):
    argv = ["verify", "--target", "lift", "--space", "lens:1,4", "--samples", "200", "--seed", "77"]
    _, a = run(capsys, *argv)
    _, b = run(capsys, *argv)
    assert a == b


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "symtc.cli", "bounds", "--space", "cp:1"],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["bounds"]["facts"][0]["value"] == 3
