import csv
import json

import numpy as np
import pytest

from aoi_mm11 import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# analytic
# ---------------------------------------------------------------------------

def test_analytic_reports_rho_for_two_sources(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--lambdas", "2,2", "--mu", "4")
    assert code == 0
    report = json.loads(out)
    assert report["correlation"]["rho"] == pytest.approx(-1 / 6, abs=1e-12)
    assert report["valid_packet_probability"] == pytest.approx(0.5)
    assert len(report["sources"]) == 2


def test_analytic_single_source_has_no_rho(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--lambdas", "1", "--mu", "1")
    assert code == 0
    report = json.loads(out)
    assert "correlation" not in report
    assert report["sources"][0]["mean_age"] == pytest.approx(2.0)


def test_analytic_rejects_bad_rate_with_exit_2(capsys):
    code, _, err = run_cli(capsys, "analytic", "--lambdas", "1,-1", "--mu", "1")
    assert code == 2
    assert "lambda_2" in err


def test_analytic_rejects_nonnumeric_rate(capsys):
    code, _, err = run_cli(capsys, "analytic", "--lambdas", "1,abc", "--mu", "1")
    assert code == 2
    assert "--lambdas" in err


def test_analytic_source_filter_and_custom_grid(capsys):
    code, out, _ = run_cli(
        capsys, "analytic", "--lambdas", "1,1", "--mu", "1",
        "--source", "1", "--s-grid", "1,2",
    )
    assert code == 0
    report = json.loads(out)
    assert len(report["sources"]) == 1
    assert report["sources"][0]["lst"]["s"] == [1.0, 2.0]
    assert report["sources"][0]["lst"]["value"][0] == pytest.approx(0.2)


def test_analytic_writes_to_file(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    code, out, _ = run_cli(
        capsys, "analytic", "--lambdas", "1,1", "--mu", "1", "--out", str(out_file)
    )
    assert code == 0
    assert out == ""
    assert json.loads(out_file.read_text())["params"]["mu"] == 1.0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_emits_estimates(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "--lambdas", "1,1", "--mu", "1",
        "--arrivals", "50000", "--reps", "3", "--seed", "5",
    )
    assert code == 0
    est = json.loads(out)
    assert est["n_replications"] == 3
    assert len(est["seeds"]) == 3
    assert est["base_seed"] == 5
    assert est["rng"] == "PCG64"
    assert est["rho"] == pytest.approx(-1 / 7, abs=0.05)
    assert est["rho_se"] > 0


def test_simulate_is_byte_deterministic(tmp_path, capsys):
    args = [
        "simulate", "--lambdas", "1,1", "--mu", "1",
        "--arrivals", "30000", "--reps", "2", "--seed", "9",
    ]
    f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(args + ["--out", str(f1)]) == 0
    assert cli.main(args + ["--out", str(f2)]) == 0
    assert f1.read_bytes() == f2.read_bytes()


def test_simulate_single_rep_warns(capsys):
    with pytest.warns(UserWarning, match="standard errors"):
        code, out, _ = run_cli(
            capsys, "simulate", "--lambdas", "1,1", "--mu", "1",
            "--arrivals", "20000", "--reps", "1", "--seed", "4",
        )
    assert code == 0
    est = json.loads(out)
    assert est["rho_se"] is None


def test_simulate_dump_path(tmp_path, capsys):
    dump = tmp_path / "path.csv"
    code, out, _ = run_cli(
        capsys, "simulate", "--lambdas", "1,1", "--mu", "1",
        "--arrivals", "5000", "--reps", "2", "--seed", "3",
        "--dump-path", str(dump),
    )
    assert code == 0
    rows = list(csv.DictReader(dump.open()))
    assert set(rows[0]) == {"epoch", "source", "post_update_age"}
    assert len(rows) > 500
    assert json.loads(out)["path_csv"] == str(dump)


def test_simulate_rejects_conflicting_horizons(capsys):
    code, _, err = run_cli(
        capsys, "simulate", "--lambdas", "1,1", "--mu", "1",
        "--arrivals", "100", "--sim-time", "10", "--reps", "2", "--seed", "1",
    )
    assert code == 2
    assert "arrivals or sim_time" in err


def test_simulate_draws_seed_from_entropy_when_omitted(capsys):
    code, out, err = run_cli(
        capsys, "simulate", "--lambdas", "1,1", "--mu", "1",
        "--arrivals", "5000", "--reps", "2",
    )
    assert code == 0
    assert "seed drawn from entropy:" in err
    printed = int(err.split("seed drawn from entropy:")[1].split()[0])
    assert json.loads(out)["base_seed"] == printed


def test_config_file_supplies_defaults_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "lambdas": "1,1", "mu": 1, "arrivals": 20000, "reps": 2, "seed": 77,
    }))
    code, out, _ = run_cli(capsys, "simulate", "--config", str(cfg))
    assert code == 0
    est = json.loads(out)
    assert est["base_seed"] == 77
    assert est["n_replications"] == 2

    code, out, _ = run_cli(
        capsys, "simulate", "--config", str(cfg), "--reps", "3", "--mu", "2"
    )
    assert code == 0
    est = json.loads(out)
    assert est["n_replications"] == 3
    assert est["params"]["mu"] == 2.0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_passes_with_adequate_run(tmp_path, capsys):
    out_csv = tmp_path / "val.csv"
    code, _, err = run_cli(
        capsys, "validate", "--lambdas", "1,1", "--mu", "1",
        "--arrivals", "200000", "--reps", "8", "--seed", "20260814",
        "--z-threshold", "5", "--out", str(out_csv),
    )
    assert code == 0
    assert "within |z|" in err
    rows = list(csv.DictReader(out_csv.open()))
    assert {"quantity", "analytic", "simulated", "se", "z"} == set(rows[0])
    names = {r["quantity"] for r in rows}
    assert "rho" in names and "valid_fraction" in names


def test_validate_fails_with_absurd_threshold(capsys):
    code, out, err = run_cli(
        capsys, "validate", "--lambdas", "1,1", "--mu", "1",
        "--arrivals", "30000", "--reps", "3", "--seed", "2",
        "--z-threshold", "0.001",
    )
    assert code == 1
    assert "EXCEEDED" in err


def test_validate_k3_omits_joint_rows(capsys):
    code, out, _ = run_cli(
        capsys, "validate", "--lambdas", "1,2,3", "--mu", "2",
        "--arrivals", "50000", "--reps", "3", "--seed", "6",
        "--z-threshold", "6",
    )
    assert code == 0
    names = {r["quantity"] for r in csv.DictReader(out.splitlines())}
    assert "mean_age[3]" in names
    assert "rho" not in names


def test_validate_rejects_single_rep(capsys):
    code, _, err = run_cli(
        capsys, "validate", "--lambdas", "1,1", "--mu", "1",
        "--reps", "1", "--seed", "1",
    )
    assert code == 2
    assert "reps" in err


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def test_sweep_analytic_reproduces_minimum(tmp_path, capsys):
    out_csv = tmp_path / "sweep.csv"
    code, _, err = run_cli(
        capsys, "sweep", "--mu", "4", "--lambda2", "2",
        "--lambda1-min", "0.1", "--lambda1-max", "20", "--points", "200",
        "--out", str(out_csv),
    )
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 200
    rhos = np.array([float(r["rho_analytic"]) for r in rows])
    lams = np.array([float(r["lambda1"]) for r in rows])
    assert np.all(rhos < 0)
    i = int(np.argmin(rhos))
    assert lams[i] == pytest.approx(2.0, abs=0.11)
    assert rhos[i] == pytest.approx(-1 / 6, abs=1e-6)
    assert "analytic minimum for mu=4" in err


def test_sweep_multiple_mu_curves_ordered(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--mu", "1,2", "--lambda2", "2",
        "--lambda1-min", "0.5", "--lambda1-max", "4", "--points", "5",
    )
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 10
    assert [float(r["mu"]) for r in rows] == [1.0] * 5 + [2.0] * 5
    lam_col = [float(r["lambda1"]) for r in rows[:5]]
    assert lam_col == sorted(lam_col)
    assert rows[0]["lambda2"] == "2.0"


def test_sweep_header_and_round_trip(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--mu", "4", "--points", "3",
        "--lambda1-min", "1", "--lambda1-max", "3",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "lambda1,lambda2,mu,rho_analytic"
    reparsed = list(csv.DictReader(lines))
    assert float(reparsed[1]["lambda1"]) == 2.0


def test_sweep_both_mode_within_4_se(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--mu", "2", "--lambda2", "2",
        "--lambda1-min", "0.5", "--lambda1-max", "8", "--points", "6",
        "--mode", "both", "--reps", "6", "--arrivals", "300000",
        "--seed", "101",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "lambda1,lambda2,mu,rho_analytic,rho_sim,rho_se"
    for r in csv.DictReader(lines):
        gap = abs(float(r["rho_sim"]) - float(r["rho_analytic"]))
        assert gap <= 4 * float(r["rho_se"]), r
