import json

from kaczmarz_pr.cli import main


GOOD_CONFIG = (
    "model = sphere\n"
    "n = 8\n"
    "m = 120\n"
    "trials = 3\n"
    "master_seed = 17\n"
)


def test_run_missing_config_exits_2(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "none.cfg")]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_malformed_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("model = sphere\nn = 4\nm = 10\nmystery = 3\n")
    assert main(["run", "--config", str(path)]) == 2
    assert "mystery" in capsys.readouterr().err


def test_run_without_output_path_exits_2(tmp_path, capsys):
    path = tmp_path / "no_out.cfg"
    path.write_text(GOOD_CONFIG)
    assert main(["run", "--config", str(path)]) == 2
    assert "output path" in capsys.readouterr().err


def test_run_writes_deterministic_csv(tmp_path, capsys):
    path = tmp_path / "exp.cfg"
    path.write_text(GOOD_CONFIG)
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(["run", "--config", str(path), "--out", str(out1)]) == 0
    assert main(["run", "--config", str(path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_text().startswith("trial_id,seed,n,m,model,epoch")
    capsys.readouterr()


def test_run_json_format(tmp_path, capsys):
    path = tmp_path / "exp.cfg"
    path.write_text(GOOD_CONFIG)
    out = tmp_path / "summary.json"
    assert main(["run", "--config", str(path), "--out", str(out), "--format", "json"]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["trials"]) == 3
    capsys.readouterr()


def test_run_flag_overrides(tmp_path, capsys):
    path = tmp_path / "exp.cfg"
    path.write_text(GOOD_CONFIG)
    out = tmp_path / "c.csv"
    assert main(["run", "--config", str(path), "--out", str(out), "--trials", "1"]) == 0
    rows = out.read_text().splitlines()
    assert all(row.split(",")[0] == "0" for row in rows[1:])
    capsys.readouterr()


def test_estimate_l_stdout_report(capsys):
    code = main([
        "estimate-l", "--n", "2", "--m", "200", "--alpha", "20",
        "--budget", "300", "--seed", "1",
    ])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert "L_estimate" in payload
    assert payload["search_mode"] == "dense_net"


def test_estimate_l_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main([
        "estimate-l", "--n", "8", "--m", "160", "--alpha", "600",
        "--c0", "1e-6", "--budget", "256", "--seed", "2", "--out", str(out),
    ])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["search_mode"] == "random_refine"
    assert payload["upper_bound_on_sphere_min"] is True
    capsys.readouterr()


def test_estimate_l_missing_m_exits_2(capsys):
    assert main(["estimate-l", "--n", "4", "--alpha", "10"]) == 2
    capsys.readouterr()


def test_verify_small_budget_passes(capsys):
    # the documented contract: a correct build exits 0
    assert main(["verify", "--trials", "100000", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[FAIL]" not in out
