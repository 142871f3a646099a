import csv
import json
import subprocess
import sys

import pytest

from scpir.cli import main

HETERO = "0.1,0.2,0.2,0.25,0.3,0.4,0.65,0.9"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_place_heterogeneous(capsys, tmp_path):
    seg_csv, trace_csv, js = tmp_path / "s.csv", tmp_path / "t.csv", tmp_path / "p.json"
    code, out, _ = run(capsys, "place", "--mu", HETERO, "--csv", str(seg_csv), "--trace-csv", str(trace_csv), "--json", str(js))
    assert code == 0
    assert "validation: valid, exact fill" in out
    rows = list(csv.DictReader(seg_csv.open()))
    assert list(rows[0]) == ["segment_index", "alpha_num", "alpha_den", "dbset"]
    assert rows[0] == {"segment_index": "1", "alpha_num": "1", "alpha_den": "10", "dbset": "1;7;8"}
    assert len(rows) == 7
    trace = list(csv.DictReader(trace_csv.open()))
    assert list(trace[0]) == ["iteration", "t_prime", "n_prime", "e", "kind"]
    payload = json.loads(js.read_text())
    assert payload["segments"][1] == {"alpha": "1/5", "dbset": [2, 7, 8]}
    assert payload["validation"]["exact_fill"] is True


def test_place_nonint_prints_split(capsys):
    code, out, _ = run(capsys, "place", "--mu", "1/5,1/5,2/5,3/5,1")
    assert code == 0
    assert "split ratio r = 1/3" in out
    assert "mu_floor = [1/15, 1/15, 2/15, 1/3, 3/5]" in out


def test_place_infeasible_fill_problem(capsys):
    code, _, err = run(capsys, "place", "--mu", "0.3,0.3,0.7", "--t", "2")
    assert code == 2
    assert "infeasible" in err


def test_place_feasible_fill_problem(capsys):
    code, out, _ = run(capsys, "place", "--mu", "1/2,1/2,1/2,1/2", "--t", "1")
    assert code == 0
    assert "groups of 1" in out


def test_retrieve_disjoint(capsys):
    code, out, _ = run(capsys, "retrieve", "--uniform", "1/2", "--n", "4", "--k", "3", "--L", "16", "--placement", "disjoint", "--theta", "2")
    assert code == 0
    assert "D = 28" in out
    assert "R = 4/7" in out
    assert "capacity-achieving: yes" in out
    assert "decoded correctly: yes" in out


def test_retrieve_json_is_byte_identical(capsys, tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        code, _, _ = run(capsys, "retrieve", "--mu", "1/5,1/5,2/5,3/5,1", "--seed", "7", "--json", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    payload = json.loads(outs[0])
    assert payload["rate"] == "30/43"
    assert {"theta", "seed", "L", "d_total_bits", "per_db_bits", "rate"} <= set(payload)


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# cyclic setting\nuniform = 3/5\nn = 5\nk = 2\nplacement = cyclic\n")
    code, out, _ = run(capsys, "retrieve", "--config", str(cfg))
    assert code == 0
    assert "R = 3/4" in out
    # flags override the file
    code, out, _ = run(capsys, "retrieve", "--config", str(cfg), "--k", "3")
    assert "K = 3" in out


def test_config_rejects_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "retrieve", "--config", str(cfg))
    assert code == 2
    assert "unknown config keys" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["place", "--mu", "0.5,1.5"],
        ["place", "--mu", "1/4,1/4"],
        ["place", "--mu", "abc"],
        ["place"],
        ["retrieve", "--uniform", "1/2", "--n", "4", "--k", "3", "--L", "17", "--placement", "disjoint"],
        ["retrieve", "--mu", HETERO, "--placement", "cyclic"],
        ["retrieve", "--uniform", "1/2", "--n", "4", "--theta", "9"],
        ["retrieve", "--uniform", "1/2"],
    ],
)
def test_invalid_input_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_audit_enumerate_passes(capsys, tmp_path):
    js = tmp_path / "a.json"
    code, out, _ = run(capsys, "audit", "--uniform", "1", "--n", "2", "--k", "2", "--enumerate", "--json", str(js))
    assert code == 0
    payload = json.loads(js.read_text())
    assert payload["verdict"] == "pass"
    assert [a["name"] for a in payload["audits"]] == ["storage", "decode", "privacy"]


def test_audit_broken_symmetry_fails(capsys):
    code, out, _ = run(capsys, "audit", "--uniform", "1", "--n", "2", "--k", "2", "--enumerate", "--break-symmetry", "--seeds", "1")
    assert code == 1
    assert "privacy  FAIL" in out


def test_audit_sample(capsys):
    code, out, _ = run(capsys, "audit", "--uniform", "1/2", "--n", "4", "--k", "3", "--placement", "disjoint", "--sample", "500", "--threshold", "0.2", "--seeds", "2")
    assert code == 0
    assert "max TV" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "scpir", "place", "--uniform", "1/2", "--n", "4"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "validation: valid" in res.stdout
