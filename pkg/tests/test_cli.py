"""End-to-end CLI behavior through the in-process entry point."""

import json

import numpy as np
import pytest

from v2nsim import cli
from v2nsim.config import SimConfig, config_hash
from v2nsim.core import Position
from v2nsim.mobility import (MobilityTrace, TraceSample, save_trace,
                             synth_randomtrip_trace)

TINY_SETS = ["--set", "duration_s=10", "--set", "n_drops=2",
             "--set", "lambda_mmw=30"]


def _simulate(out_dir, *extra):
    return cli.main(["simulate", "--seed", "7", "--out-dir", str(out_dir),
                     *TINY_SETS, *extra])


def test_simulate_writes_summary_and_manifest(tmp_path, capsys):
    out = tmp_path / "run"
    assert _simulate(out) == 0
    stdout = capsys.readouterr().out
    assert "mmwave: mean rate" in stdout
    assert "lte: mean rate" in stdout

    lines = (out / "summary.csv").read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("tech,lambda_mmw,N,M,T_tr_s,mean_rate_bps")
    assert lines[1].startswith("mmwave,30.0,16,64,0.1,")
    assert lines[2].startswith("lte,0.0,1,1,0.0,")

    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest) == {"version", "config_hash", "root_seed", "outputs",
                             "wall_clock_s"}
    assert manifest["root_seed"] == 7
    assert manifest["outputs"] == ["summary.csv"]
    expected = SimConfig(duration_s=10.0, n_drops=2, lambda_mmw=30.0,
                         root_seed=7)
    assert manifest["config_hash"] == config_hash(expected)


def test_simulate_same_seed_is_byte_identical(tmp_path):
    assert _simulate(tmp_path / "a") == 0
    assert _simulate(tmp_path / "b") == 0
    first = (tmp_path / "a" / "summary.csv").read_bytes()
    second = (tmp_path / "b" / "summary.csv").read_bytes()
    assert first == second


def test_simulate_emit_timeseries(tmp_path):
    out = tmp_path / "run"
    assert _simulate(out, "--emit-timeseries") == 0
    lines = (out / "timeseries.csv").read_text().splitlines()
    assert lines[0] == "t_s,tech,serving_rsu,snr_db,rate_bps,lost_alignment"
    n_steps = int(round(10.0 / 0.1))
    assert len(lines) == 1 + 2 * n_steps
    lte_rows = [l for l in lines[1:] if ",lte," in l]
    assert len(lte_rows) == n_steps
    assert all(row.endswith(",0") for row in lte_rows)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["summary.csv", "timeseries.csv"]


def test_simulate_rejects_negative_density(tmp_path, capsys):
    code = _simulate(tmp_path / "x", "--set", "lambda_mmw=-5")
    assert code == 1
    err = capsys.readouterr().err
    assert "config error" in err
    assert "lambda_mmw" in err


def test_simulate_rejects_unknown_key(tmp_path, capsys):
    code = _simulate(tmp_path / "x", "--set", "lambda_mmwave=50")
    assert code == 1
    assert "unknown config key" in capsys.readouterr().err


def test_simulate_rejects_malformed_override(tmp_path, capsys):
    code = _simulate(tmp_path / "x", "--set", "lambda_mmw")
    assert code == 1
    assert "key=value" in capsys.readouterr().err


def test_simulate_rejects_bad_workers_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("V2N_WORKERS", "abc")
    code = _simulate(tmp_path / "x")
    assert code == 1
    assert "V2N_WORKERS must be an integer" in capsys.readouterr().err


def test_workers_flag_beats_workers_env(tmp_path, monkeypatch):
    monkeypatch.setenv("V2N_WORKERS", "abc")
    assert _simulate(tmp_path / "x", "--workers", "1") == 0


def test_config_file_plus_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("duration_s = 10\nn_drops = 2\nlambda_mmw = 30\n")
    out = tmp_path / "run"
    code = cli.main(["simulate", "--seed", "7", "--config", str(cfg),
                     "--out-dir", str(out), "--set", "lambda_mmw=60"])
    assert code == 0
    assert ",60.0," in (out / "summary.csv").read_text().splitlines()[1]


def test_sweep_single_point(tmp_path, capsys):
    out = tmp_path / "grid"
    code = cli.main(["sweep", "--seed", "7", "--out-dir", str(out),
                     "--set", "duration_s=10", "--set", "n_drops=2",
                     "--set", "lambda_grid=30", "--set", "array_grid=4x4",
                     "--set", "ttr_grid=0"])
    assert code == 0
    assert "wrote" in capsys.readouterr().out
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("mmwave,30.0,4,4,0.0,")
    assert lines[2].startswith("lte,")
    svg = (out / "sweep.svg").read_text()
    assert svg.lstrip().startswith("<?xml")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["sweep.csv", "sweep.svg"]


def test_sweep_rejects_unknown_figure(tmp_path, capsys):
    code = cli.main(["sweep", "--out-dir", str(tmp_path), "--figure", "fig9"])
    assert code == 1
    assert "unknown figure preset" in capsys.readouterr().err


def test_sweep_figure_timeseries_preset(tmp_path):
    out = tmp_path / "fig"
    code = cli.main(["sweep", "--seed", "7", "--out-dir", str(out),
                     "--figure", "fig3", "--set", "duration_s=20"])
    assert code == 0
    lines = (out / "fig3.csv").read_text().splitlines()
    techs = {line.split(",")[1] for line in lines[1:]}
    assert techs == {"mmwave_n16_m64", "mmwave_n4_m4", "lte"}
    n_steps = int(round(20.0 / 0.1))
    assert len(lines) == 1 + 3 * n_steps
    assert (out / "fig3.svg").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["fig3.csv", "fig3.svg"]


def test_validate_trace_reports_shape(tmp_path, capsys):
    rng = np.random.default_rng(9)
    trace = synth_randomtrip_trace(4, 200.0, 250.0, 13.89, 0.3, 30.0, rng,
                                   dt_s=0.1)
    path = tmp_path / "drive.csv"
    save_trace(trace, path)
    assert cli.main(["validate-trace", str(path)]) == 0
    out = capsys.readouterr().out
    assert "duration 250.0 s" in out
    assert "2500 samples, uniform dt 0.1 s" in out
    assert "speed max" in out


def test_validate_trace_missing_file(tmp_path, capsys):
    code = cli.main(["validate-trace", str(tmp_path / "nope.csv")])
    assert code == 1
    assert "invalid trace" in capsys.readouterr().err


def test_validate_trace_rejects_shuffled_rows(tmp_path, capsys):
    samples = tuple(TraceSample(float(t), Position(0.0, 0.0), 1.0)
                    for t in range(3))
    path = tmp_path / "drive.csv"
    save_trace(MobilityTrace(samples=samples, dt_s=1.0), path)
    lines = path.read_text().splitlines()
    lines[1], lines[2] = lines[2], lines[1]
    path.write_text("\n".join(lines) + "\n")
    code = cli.main(["validate-trace", str(path)])
    assert code == 1
    assert "non-monotone timestamp" in capsys.readouterr().err


def test_validate_trace_rejects_missing_column(tmp_path, capsys):
    path = tmp_path / "drive.csv"
    path.write_text("t_s,vehicle_id,x_m,y_m\n0.0,0,0.0,0.0\n")
    code = cli.main(["validate-trace", str(path)])
    assert code == 1
    assert "speed_mps" in capsys.readouterr().err
