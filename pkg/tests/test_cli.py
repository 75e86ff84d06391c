import json

import pytest

from psdmm.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_replicated_example(capsys):
    code, out, _ = run(capsys, "run", "--scheme", "replicated", "-p", "2", "-m", "2", "-n", "2",
                       "-L", "2", "-N", "16", "--stragglers", "2", "--seed", "7")
    assert code == 0 and json.loads(out)["match"] is True


def test_run_below_threshold_is_usage_error(capsys):
    code, _, err = run(capsys, "run", "--scheme", "mds5", "-N", "11")
    assert code == 2 and "R_c" in err


def test_run_deterministic(capsys):
    first = run(capsys, "run", "--seed", "3")[1]
    assert run(capsys, "run", "--seed", "3")[1] == first


def test_run_env_seed_and_config_file(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PSDMM_SEED", "11")
    out = json.loads(run(capsys, "run", "--no-matrices")[1])
    assert out["config"]["seed"] == 11 and "decoded" not in out
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scheme": "mds", "N": 14, "stragglers": 2, "seed": 4}))
    code, out, _ = run(capsys, "run", "--config", str(cfg), "--theta", "1")
    data = json.loads(out)
    assert code == 0 and data["config"]["theta"] == 1 and data["config"]["seed"] == 4
    cfg.write_text(json.dumps({"nope": 1}))
    assert run(capsys, "run", "--config", str(cfg))[0] == 2


def test_run_table_and_output_file(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "--format", "table")
    assert code == 0 and "match" in out.splitlines()[0]
    target = tmp_path / "r.json"
    assert run(capsys, "run", "-o", str(target))[0] == 0
    assert json.loads(target.read_text())["match"] is True


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--bogus"])
    assert exc.value.code == 2


def test_thresholds_rows(capsys):
    code, out, _ = run(capsys, "thresholds", "--pmn", "5,5,5", "--r-star", "99", "--format", "json")
    (row,) = json.loads(out)
    assert code == 0 and (row["yu"], row["replicated"], row["improvement_pct"]) == (199, 155, 22.11)
    (row,) = json.loads(run(capsys, "thresholds", "-p", "9", "-m", "9", "-n", "9", "--r-star", "520",
                            "--format", "json")[1])
    assert (row["yu"], row["replicated"], row["improvement_pct"]) == (1041, 819, 21.33)


def test_thresholds_without_r_star(capsys):
    code, out, _ = run(capsys, "thresholds", "--pmn", "1,1,1")
    assert code == 0
    header, values = out.splitlines()
    yu_col = header.split().index("yu")
    assert values.split()[yu_col] == "-"


def test_thresholds_r_star_file(capsys, tmp_path):
    good = tmp_path / "r.csv"
    good.write_text("p,m,n,r_star\n3,3,3,23\n")
    rows = json.loads(run(capsys, "thresholds", "--r-star-file", str(good), "--format", "json")[1])
    assert rows[0]["improvement_pct"] == 17.02
    bad = tmp_path / "bad.csv"
    bad.write_text("p,m,n,r_star\n3,3,x,23\n")
    assert run(capsys, "thresholds", "--r-star-file", str(bad))[0] == 2
    bad.write_text("a,b\n1,2\n")
    assert run(capsys, "thresholds", "--r-star-file", str(bad))[0] == 2
    assert run(capsys, "thresholds", "--r-star-file", str(tmp_path / "missing.csv"))[0] == 2


def test_thresholds_literature_csv(capsys):
    code, out, _ = run(capsys, "thresholds", "--literature", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 10 and lines[0].startswith("p,m,n,r_star")


def test_verify_prints_grids(capsys):
    code, out, _ = run(capsys, "verify", "--variant", "replicated", "-p", "2", "-m", "2", "-n", "2")
    assert code == 0
    assert "   1    2" in out and "   4    9" in out and "recovery threshold: 14" in out


@pytest.mark.parametrize("variant", ["replicated", "mds", "mds6"])
def test_verify_perturbation_fails(capsys, variant):
    assert run(capsys, "verify", "--variant", variant, "--perturb")[0] == 1
    assert run(capsys, "verify", "--variant", variant, "--perturb", "beta:0,0=1000")[0] == 1


def test_verify_json_and_bad_perturbation(capsys):
    code, out, _ = run(capsys, "verify", "--variant", "mds", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["report"]["published_threshold"] == 11
    assert run(capsys, "verify", "--perturb", "alpha:9,9=1")[0] == 2
    assert run(capsys, "verify", "--perturb", "junk")[0] == 2


def test_tradeoff_row_count(capsys):
    code, out, _ = run(capsys, "tradeoff", "--scheme", "new", "--L", "2")
    assert code == 0 and len(out.strip().splitlines()) == 27 + 1
    code, out, _ = run(capsys, "tradeoff", "--scheme", "chang-tandon", "--L", "3", "--rc", "5")
    assert len(out.strip().splitlines()) == 4 + 1
    code, out, _ = run(capsys, "tradeoff", "--scheme", "mds", "--grid", "1,1,1;2,2,2", "--format", "json")
    assert [r["p"] for r in json.loads(out)] == [1, 2]
    assert run(capsys, "tradeoff", "--grid", "1,1")[0] == 2
    assert run(capsys, "tradeoff", "--scheme", "xyz")[0] == 2


def test_audit_subcommand(capsys):
    code, out, _ = run(capsys, "audit", "--samples", "20000", "--controls", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["ok"] and len(data["reports"]) == 8
    code, out, _ = run(capsys, "audit", "--scheme", "mds", "--samples", "20000")
    assert code == 0 and "UNEXPECTED" not in out
