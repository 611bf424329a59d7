import csv
import json
import subprocess
import sys

from steinberg.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


def test_classify_a2(capsys):
    code, rep, _ = run(capsys, "classify", "--type", "A2")
    assert code == 0
    assert rep["n_classes"] == 3 and rep["n_elliptic"] == 1
    ell = [c for c in rep["classes"] if c["elliptic"]][0]
    assert ell["good_element"] == "1,2" and ell["y_star"] == ["1,2,1", "1,2,1"]
    assert rep["config"]["version"]


def test_verify_xi_passes(capsys):
    code, rep, _ = run(capsys, "verify-xi", "--type", "A2", "--ring", "Fq:2")
    assert code == 0 and rep["ok"]
    assert len(rep["results"]) == 2
    assert all(r["injective"] and r["surjective"] and r["inverse_ok"] for r in rep["results"])


def test_twisted_verify(capsys):
    code, rep, _ = run(capsys, "verify-xi", "--type", "A2", "--ring", "Fq:4", "--delta", "2,1",
                       "--chi", "frob:2")
    assert code == 0 and rep["ok"]


def test_config_errors_exit_2(capsys):
    code, rep, err = run(capsys, "verify-xi", "--type", "A2", "--class", "1")
    assert code == 2 and "error" in rep and err.startswith("error:")
    assert run(capsys, "verify-xi", "--type", "A2", "--ring", "Fq:6")[0] == 2
    assert run(capsys, "verify-xi", "--type", "B2", "--delta", "2,1")[0] == 2
    assert run(capsys, "verify-xi")[0] == 2
    assert run(capsys, "verify-xi", "--type", "A2", "--chi", "bogus")[0] == 2
    assert run(capsys, "verify-xi", "--type", "A2", "--w", "1")[0] == 2
    assert run(capsys, "symbolic", "--type", "A3")[0] == 2
    assert run(capsys, "classify", "--datum", "/nonexistent.json")[0] == 2


def test_datum_file(tmp_path, capsys):
    f = tmp_path / "d.json"
    f.write_text(json.dumps({"cartan": [[2, -1], [-1, 2]], "lattice": "ad", "delta": [2, 1]}))
    code, rep, _ = run(capsys, "classify", "--datum", str(f))
    assert code == 0 and rep["n_classes"] >= 2


def test_orbit_count_csv(tmp_path, capsys):
    out = tmp_path / "o.csv"
    js = tmp_path / "o.json"
    code, rep, _ = run(capsys, "orbit-count", "--type", "A2", "--ring", "Fq:2", "--csv", str(out),
                       "--output", str(js))
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["w", "orbits", "expected_orbits", "orbit_size", "free"]
    assert sorted(r[0] for r in rows[1:]) == ["1,2", "2,1"]
    assert all(r[1] == r[2] == "4" and r[3] == "8" and r[4] == "True" for r in rows[1:])
    assert json.loads(js.read_text()) == rep


def test_other_subcommands(capsys):
    assert run(capsys, "inverse-check", "--type", "B2", "--lattice", "ad", "--ring", "Fq:2")[0] == 0
    code, rep, _ = run(capsys, "cross-section", "--type", "A2", "--ring", "Fq:3")
    assert code == 0 and all(r["unipotent"] == 1 for r in rep["results"])
    code, rep, _ = run(capsys, "twq", "--type", "A3")
    assert code == 0 and {r["order"] for r in rep["results"]} == {4}
    # several elliptic classes with different T_w
    code, rep, _ = run(capsys, "twq", "--type", "G2", "--lattice", "ad")
    assert code == 0
    assert sorted({(r["class"], r["order"]) for r in rep["results"]}) == \
        [("1,2", 1), ("1,2,1,2", 3), ("1,2,1,2,1,2", 4)]
    code, rep, _ = run(capsys, "spaltenstein")
    assert code == 0 and rep["identity_holds"]
    code, rep, _ = run(capsys, "symbolic", "--type", "A1")
    assert code == 0
    assert rep["results"][0]["xi"] == ["X1 + X2", "-X1"]


def test_reports_are_deterministic_across_jobs(tmp_path):
    outs = []
    for jobs in ("1", "2"):
        r = subprocess.run([sys.executable, "-m", "steinberg", "verify-xi", "--type", "A2", "--ring", "Fq:3",
                            "--jobs", jobs], capture_output=True, check=True)
        outs.append(r.stdout)
    assert outs[0] == outs[1]


def test_version():
    r = subprocess.run([sys.executable, "-m", "steinberg", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()


def test_ceilings_are_config_knobs(capsys):
    from steinberg import braid
    before = braid.STATE_CEILING
    code, rep, _ = run(capsys, "verify-xi", "--type", "A3", "--ring", "Fq:2", "--braid-state-ceiling", "2")
    assert code == 2 and "ceiling" in rep["error"]
    assert rep["config"]["braid_state_ceiling"] == 2
    assert braid.STATE_CEILING == before
    code, rep, _ = run(capsys, "symbolic", "--type", "A2", "--monomial-ceiling", "1")
    assert code == 2 and "monomial ceiling" in rep["error"]
