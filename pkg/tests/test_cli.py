import json

from fairsim.cli import main


def test_synth_deterministic(tmp_path):
    args = ["synth", "--pattern", "stop_and_go", "--ucv", "5", "--dcv", "5", "--seconds", "30", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_run_two_algorithms(tmp_path, capsys):
    scen = tmp_path / "round.csv"
    assert main(["synth", "--pattern", "constant_speed_ring", "--ucv", "3", "--dcv", "3",
                 "--seconds", "2", "--radius", "2,6", "--out", str(scen)]) == 0
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"fps0": 10}')
    out = tmp_path / "out"
    rc = main(["run", "--config", str(cfg), "--scenario", str(scen), "--algo", "fair,sa_max",
               "--out", str(out), "--set", "contention.seed=3"])
    assert rc == 0
    assert (out / "series_FAIR_3+3_s0.csv").exists() and (out / "series_SA_MAX_3+3_s0.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["runs"][0]["overrides"] == ["contention.seed=3"]
    summary = json.loads(capsys.readouterr().out)
    assert summary["rows"][0]["baseline"] == "SA_MAX"


def test_validate_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"period_T": 0, "beta_unallocated": 0}')
    assert main(["validate", "--config", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "period_T" in err and "beta_unallocated" in err


def test_runtime_and_input_errors(tmp_path, capsys):
    assert main(["run", "--scenario", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("trackId,frame\n1,0\n")
    assert main(["run", "--scenario", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "invalid" in capsys.readouterr().err


def test_sweep_loads_and_weights(tmp_path):
    out = tmp_path / "sw"
    rc = main(["sweep", "--loads", "2+2,3+3", "--weights", "1:1,20:1", "--algo", "fair",
               "--seconds", "1", "--radius", "2,6", "--out", str(out)])
    assert rc == 0
    rows = (out / "q_vs_weights.csv").read_text().strip().splitlines()
    assert len(rows) == 3
