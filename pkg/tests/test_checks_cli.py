import json
from fractions import Fraction

import pytest

from tractor_poisson.checks import BY_ID, REGISTRY, Context, resolve, run_all, run_check
from tractor_poisson.cli import cli_main


def test_registry_ids_are_unique_and_sorted():
    ids = [c.id for c in REGISTRY]
    assert len(ids) == len(set(ids))
    for prefix in [f"V{i:02d}" for i in range(1, 17)]:
        assert any(i.startswith(prefix) for i in ids)
    assert resolve(["V07"]) == [BY_ID["V07_edge_kernel"], BY_ID["V07_kernel_bgg_criterion"]]
    with pytest.raises(KeyError):
        resolve(["V99"])


def test_run_check_examples():
    assert run_check("V05", 3, {"k": Fraction(2)}).status == "pass"
    r = run_check("V10", 4, {"k": 1, "lambda": Fraction(1)})
    assert r.status == "pass" and r.info["eigenvalue"] == "-3"
    r = run_check("V12", 2, {"k": 1})
    assert r.status == "pass" and r.params["middle"] is True


def test_run_check_domain_and_errors():
    r = run_check("V12", 3, {"k": 7})
    assert r.status == "skipped" and r.reason
    assert run_check("V15", 2, {"k": 1}).status == "skipped"
    with pytest.raises(KeyError):
        run_check("V42", 3)
    with pytest.raises(ValueError):
        run_check("V07_kernel_bgg_criterion", 3)


def test_corrupted_killing_fails_V03_with_witness():
    r = run_check("V03", 3, ctx=Context(3, killing_scale=2))
    assert r.status == "fail"
    assert r.witness["lhs"] != r.witness["rhs"]
    assert r.to_json()["witness"]["claim"]


def test_full_suite_n2():
    rep = run_all(2)
    assert rep.ok
    out = {r.id: r.status for r in rep.results}
    assert out["V15_uniqueness"] == "skipped"
    keys = [(r.id, tuple(sorted((k, str(v)) for k, v in r.params.items()))) for r in rep.results]
    assert keys == sorted(keys)
    assert rep.calibration == {"1/4": True, "1": False}


def test_full_suite_n3():
    rep = run_all(3)
    assert rep.ok, rep.text()
    lams = {r.params["lambda"] for r in rep.results if r.id.startswith("V10")}
    assert lams == {Fraction(0), Fraction(1), Fraction(-1), Fraction(2)}
    body = rep.to_json()
    assert body["normalization"] == "1/6"
    assert all("ms" not in c for c in body["checks"])
    assert all(c["status"] != "fail" or "witness" in c for c in body["checks"])
    assert set(body["summary"]) == {"pass", "fail", "skipped"}


def test_filters():
    rep = run_all(3, ["V10"], k=2, lam=-1, calibration=False)
    assert [(r.params["k"], r.params["lambda"]) for r in rep.results] == [(2, Fraction(-1))]


def test_cli_dims(capsys):
    assert cli_main(["dims", "--n", "3"]) == 0
    out = capsys.readouterr().out
    assert "2 1     18      450" in out


def test_cli_verify_text(capsys):
    assert cli_main(["verify", "--n", "4", "--checks", "V12", "--format", "text"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1].startswith("n=4 ") and "fail=0" in lines[-1]
    assert all(ln.startswith("PASS") for ln in lines[:-1])


def test_cli_verify_json(capsys):
    assert cli_main(["verify", "--n", "3", "--checks", "V02,V13", "--format", "json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert [c["id"] for c in body["checks"]] == ["V02_E_star", "V13_homology"]
    assert body["version"] and body["n"] == 3


def test_cli_bad_input(capsys):
    assert cli_main(["verify"]) != 0
    assert cli_main(["verify", "--n", "1"]) != 0
    assert cli_main(["verify", "--n", "3", "--checks", "V99"]) != 0
    assert cli_main(["export-operator", "--n", "2", "--name", "nope", "--p", "0", "--q", "0"]) != 0
    assert cli_main(["frobnicate"]) != 0
    capsys.readouterr()


def test_cli_dumps(capsys):
    assert cli_main(["dump-algebra", "--n", "2"]) == 0
    out = capsys.readouterr().out
    assert "B(E~,E~)=4" in out
    assert cli_main(["export-operator", "--n", "2", "--name", "d_P", "--p", "1", "--q", "0"]) == 0
    assert capsys.readouterr().out.startswith("# operator d_P n=2")
    assert cli_main(["dump-kernel", "--n", "3", "--k", "1"]) == 0
    assert capsys.readouterr().out.startswith("# kernel n=3 p=1 q=2")
    assert cli_main(["homology", "--n", "3"]) == 0
    assert "k=1 chains=15 ker=11 im=6 H=5" in capsys.readouterr().out
    assert cli_main(["dump-kernel", "--n", "3", "--k", "3"]) == 2
