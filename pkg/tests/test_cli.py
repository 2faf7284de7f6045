import json

import pytest

from chainsparse.cli import main

K3_EDGES = "3 3\n1 2\n2 3\n1 3\n"


@pytest.fixture
def k3_file(tmp_path):
    edges = tmp_path / "k3.txt"
    edges.write_text(K3_EDGES)
    out = tmp_path / "k3.json"
    assert main(["gen", "cut", "--edges", str(edges), "--out", str(out)]) == 0
    return out


def test_gen_cut_then_cl(k3_file, capsys):
    capsys.readouterr()
    assert main(["cl", "--in", str(k3_file)]) == 0
    assert capsys.readouterr().out.strip() == "2"
    assert json.loads(k3_file.read_text())["words"] == ["000", "011", "101", "110"]


def test_nrd_and_closure(k3_file, capsys):
    capsys.readouterr()
    assert main(["nrd", "--in", str(k3_file)]) == 0
    assert main(["cl-closure", "--in", str(k3_file)]) == 0
    assert capsys.readouterr().out.split() == ["2", "2"]


def test_density(k3_file, capsys):
    capsys.readouterr()
    assert main(["density", "--in", str(k3_file)]) == 0
    assert json.loads(capsys.readouterr().out)["phi"] == "3/2"


@pytest.mark.parametrize("eps", ["0", "1.5", "-0.1"])
def test_sparsify_rejects_bad_eps(k3_file, eps):
    assert main(["sparsify", "--in", str(k3_file), "--eps", eps]) == 2


def test_missing_file_is_input_error(tmp_path):
    assert main(["cl", "--in", str(tmp_path / "nope.json")]) == 2


def test_verify_identity(k3_file, tmp_path):
    w = tmp_path / "w.json"
    w.write_text(json.dumps({"m": 3, "weights": [1, 1, 1]}))
    assert main(["verify", "--eps", "0.1", "--code", str(k3_file), "--wt", str(w)]) == 0


def test_verify_failure_exit(k3_file, tmp_path):
    w = tmp_path / "w.json"
    w.write_text(json.dumps({"m": 3, "weights": [1, 1, 2]}))
    assert main(["verify", "--eps", "0.1", "--code", str(k3_file), "--wt", str(w)]) == 1


def test_sparsify_round_trip(tmp_path):
    code = tmp_path / "blocks.json"
    assert main(["gen", "blocks", "--sizes", "250,250", "--out", str(code)]) == 0
    wt, rep = tmp_path / "wt.json", tmp_path / "rep.json"
    assert main(["sparsify", "--in", str(code), "--eps", "0.25", "--seed", "3",
                 "--out", str(wt), "--report", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["verification"]["passed"] and report["seed"] == 3
    assert main(["verify", "--eps", "0.25", "--code", str(code), "--wt", str(wt)]) == 0


def test_reports_identical_apart_from_timestamp(k3_file, tmp_path):
    reports = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main(["sparsify", "--in", str(k3_file), "--eps", "0.5", "--seed", "7",
                     "--report", str(path)]) == 0
        data = json.loads(path.read_text())
        data.pop("timestamp")
        reports.append(json.dumps(data, sort_keys=True))
    assert reports[0] == reports[1]


def test_budget_exhaustion_exit(tmp_path):
    code = tmp_path / "r.json"
    assert main(["gen", "random", "--m", "10", "--count", "12", "--seed", "1", "--out", str(code)]) == 0
    assert main(["cl", "--in", str(code), "--budget", "2"]) == 3


def test_threads_env_recorded(k3_file, tmp_path, monkeypatch):
    monkeypatch.setenv("CHAINSPARSE_THREADS", "4")
    rep = tmp_path / "rep.json"
    assert main(["density", "--in", str(k3_file), "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["threads"] == 4


def test_contract_survival(k3_file, tmp_path):
    rep = tmp_path / "rep.json"
    assert main(["contract", "--in", str(k3_file), "--alpha", "1", "--target", "000",
                 "--trials", "2000", "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["passed"]


def test_mc_concentration(capsys):
    assert main(["mc-concentration", "--ell", "1000", "--p", "0.5", "--eps", "0.1", "--trials", "5000"]) == 0
    assert json.loads(capsys.readouterr().out)["trials"] == 5000


def test_audit_counting(k3_file):
    assert main(["audit-counting", "--in", str(k3_file)]) == 0
