"""Command-line contract tests.

Exit codes are the interface: 0 success, 1 usage error, 2 data error.
Each subcommand is exercised through main() with real files; outputs are
compared byte for byte against the library calls they wrap, so the CLI
can never drift from the package.
"""

import dataclasses

import numpy as np
import pytest

from hybridworm import experiments, stochastic, telescope
from hybridworm.cli import main
from hybridworm.model import (
    CONFICKER_2008,
    OUTBREAK_2008_INIT,
    OUTBREAK_2008_TOPOLOGY,
    PARAMS_FILE_KEYS,
    run_meanfield,
    write_params_file,
)

SMALL_SIM = ["--subnets", "50", "--nodes-per-subnet", "3", "--max-steps",
             "60", "--seed", "5"]


def sample_log(tmp_path, name="log.csv", rows=()):
    """Hand-made event log in the synthetic address embedding."""
    base = 70_000 * 256
    default = (f"0,{base + 1}", f"120,{base + 1}", f"700,{base + 2}",
               f"1900,{base + 2}")
    path = tmp_path / name
    path.write_text("timestamp,source_addr\n"
                    + "\n".join(rows or default) + "\n")
    return path


# ---------------------------------------------------------------------------
# parser-level behaviour


def test_no_command_is_usage_error(capsys):
    assert main([]) == 1
    assert "command" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    for command in ("infer", "predict", "simulate", "sweep2", "sweep3",
                    "whatif-tau", "gen-log"):
        assert command in out
    for command in ("infer", "predict", "simulate", "sweep2", "sweep3",
                    "whatif-tau", "gen-log"):
        assert main([command, "--help"]) == 0


def test_unknown_flag_is_usage_error(capsys):
    assert main(["predict", "--frobnicate"]) == 1
    assert main(["not-a-command"]) == 1
    assert main(["predict"]) == 1  # --out is required
    capsys.readouterr()


# ---------------------------------------------------------------------------
# predict


def test_predict_matches_library(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert main(["predict", "--steps", "72", "--out", str(out)]) == 0
    ref = tmp_path / "ref.csv"
    run_meanfield(CONFICKER_2008, OUTBREAK_2008_TOPOLOGY,
                  OUTBREAK_2008_INIT, 72).write_csv(ref)
    assert out.read_bytes() == ref.read_bytes()
    assert "after 72 steps" in capsys.readouterr().out


def test_predict_zero_steps_is_the_initial_state(tmp_path):
    out = tmp_path / "traj.csv"
    assert main(["predict", "--steps", "0", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,S,I,R"
    assert len(lines) == 2
    row = [float(v) for v in lines[1].split(",")]
    assert row == [0.0, OUTBREAK_2008_INIT.S, OUTBREAK_2008_INIT.I,
                   OUTBREAK_2008_INIT.R]


def test_param_precedence_preset_config_flags(tmp_path, capsys):
    config = tmp_path / "params.txt"
    write_params_file(dataclasses.replace(CONFICKER_2008, gamma=0.1), config)

    def predict(extra):
        out = tmp_path / "out.csv"
        assert main(["predict", "--steps", "24", "--out", str(out)]
                    + extra) == 0
        return out.read_bytes()

    def reference(gamma):
        ref = tmp_path / "ref.csv"
        run_meanfield(dataclasses.replace(CONFICKER_2008, gamma=gamma),
                      OUTBREAK_2008_TOPOLOGY, OUTBREAK_2008_INIT,
                      24).write_csv(ref)
        return ref.read_bytes()

    assert predict([]) == reference(0.064)                    # preset
    assert predict(["--config", str(config)]) == reference(0.1)
    assert predict(["--config", str(config),
                    "--gamma", "0.2"]) == reference(0.2)      # flag wins
    capsys.readouterr()


def test_inconsistent_alpha_override_is_usage_error(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert main(["predict", "--alpha-g", "0.5", "--out", str(out)]) == 1
    assert "error" in capsys.readouterr().err


def test_unreadable_or_bad_config_is_data_error(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert main(["predict", "--config", str(tmp_path / "missing.txt"),
                 "--out", str(out)]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("this is not a parameter file\n")
    assert main(["predict", "--config", str(bad), "--out", str(out)]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# simulate


def test_simulate_is_seed_reproducible(tmp_path, capsys):
    blobs = []
    for name in ("a", "b"):
        traj = tmp_path / f"{name}.csv"
        metrics = tmp_path / f"{name}_metrics.csv"
        assert main(["simulate", *SMALL_SIM, "--out", str(traj),
                     "--metrics-out", str(metrics)]) == 0
        blobs.append((traj.read_bytes(), metrics.read_bytes()))
    assert blobs[0] == blobs[1]
    assert "final_size = " in capsys.readouterr().out


def test_simulate_matches_library(tmp_path):
    traj = tmp_path / "traj.csv"
    assert main(["simulate", *SMALL_SIM, "--out", str(traj)]) == 0
    topo = stochastic.build_topology(50, 3, 4, experiments.topology_seed(5))
    ref = stochastic.run_sim(CONFICKER_2008, topo, 2, 60, 5)
    ref_path = tmp_path / "ref.csv"
    ref.trajectory.write_csv(ref_path)
    assert traj.read_bytes() == ref_path.read_bytes()


def test_simulate_without_seed_prints_a_reusable_one(tmp_path, capsys):
    out = tmp_path / "a.csv"
    args = ["simulate", "--subnets", "20", "--nodes-per-subnet", "2",
            "--max-steps", "10", "--out", str(out)]
    assert main(args) == 0
    line = next(l for l in capsys.readouterr().out.splitlines()
                if l.startswith("seed = "))
    seed = line.split("=")[1].strip()
    rerun = tmp_path / "b.csv"
    assert main(["simulate", "--subnets", "20", "--nodes-per-subnet", "2",
                 "--max-steps", "10", "--seed", seed,
                 "--out", str(rerun)]) == 0
    assert out.read_bytes() == rerun.read_bytes()
    capsys.readouterr()


# ---------------------------------------------------------------------------
# gen-log and infer


def test_gen_log_schema_and_lambda_alias(tmp_path, capsys):
    base = ["gen-log", "--subnets", "30", "--nodes-per-subnet", "3",
            "--initial-infected", "8", "--steps", "40",
            "--monitor-fraction", "0.25", "--seed", "3"]
    paths = {}
    for name, extra in (("lam", ["--lam", "5"]),
                        ("alias", ["--lambda", "5"]),
                        ("other", ["--lam", "10"])):
        log = tmp_path / f"{name}.csv"
        traj = tmp_path / f"{name}_traj.csv"
        assert main(base + extra + ["--out", str(log),
                                    "--trajectory-out", str(traj)]) == 0
        paths[name] = (log, traj)
    lam_log, lam_traj = paths["lam"]
    assert lam_log.read_text().splitlines()[0] == "timestamp,source_addr"
    assert lam_traj.read_text().splitlines()[0] == "t,S,I,R"
    assert lam_log.read_bytes() == paths["alias"][0].read_bytes()
    # lambda only scales probing intensity: same epidemic, different log
    assert lam_traj.read_bytes() == paths["other"][1].read_bytes()
    assert lam_log.read_bytes() != paths["other"][0].read_bytes()
    assert "events over" in capsys.readouterr().out


def test_gen_log_bad_monitor_fraction_is_usage_error(tmp_path, capsys):
    out = tmp_path / "log.csv"
    assert main(["gen-log", "--subnets", "30", "--nodes-per-subnet", "3",
                 "--steps", "10", "--monitor-fraction", "2", "--seed", "3",
                 "--out", str(out)]) == 1
    capsys.readouterr()


def test_gen_log_infer_round_trip(tmp_path, capsys):
    log = tmp_path / "log.csv"
    assert main(["gen-log", "--subnets", "4000", "--nodes-per-subnet", "5",
                 "--relevant-adjacent", "10", "--initial-infected", "10",
                 "--steps", "300", "--monitor-fraction", "0.015625",
                 "--seed", "55", "--out", str(log)]) == 0
    parsed = telescope.parse_events(log)
    series = telescope.build_window_series(
        telescope.build_timelines(parsed.events))
    peak = int(series.windows[np.argmax(series.I)])

    params_out = tmp_path / "params.txt"
    assert main(["infer", str(log), "--t-start", str(peak - 30),
                 "--t-end", str(peak + 10), "--out", str(params_out)]) == 0
    out = capsys.readouterr().out
    assert "usable" in out
    assert "lambda = " in out
    keys = [line.split(" = ")[0]
            for line in params_out.read_text().splitlines()]
    assert tuple(keys) == PARAMS_FILE_KEYS


def test_infer_missing_file_is_data_error(tmp_path, capsys):
    assert main(["infer", str(tmp_path / "nope.csv")]) == 2
    assert "error" in capsys.readouterr().err


def test_infer_everything_background_is_data_error(tmp_path, capsys):
    log = sample_log(tmp_path)
    assert main(["infer", str(log), "--baseline", str(log)]) == 2
    assert "background" in capsys.readouterr().err


def test_infer_empty_window_range_is_data_error(tmp_path, capsys):
    log = sample_log(tmp_path)
    assert main(["infer", str(log), "--t-start", "500",
                 "--t-end", "600"]) == 2
    assert "usable" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweeps


def test_sweep2_deterministic_and_matches_library(tmp_path, capsys):
    args = ["sweep2", "--pair", "global-local", "--step", "0.5",
            "--runs", "2", "--subnets", "50", "--nodes-per-subnet", "3",
            "--max-steps", "50", "--seed", "11", "--out"]
    blobs = []
    for name, jobs in (("a", "1"), ("b", "1"), ("c", "2")):
        out = tmp_path / f"{name}.csv"
        assert main(args + [str(out), "--jobs", jobs]) == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]

    config = experiments.SweepConfig(
        pair="global-local", step=0.5, runs=2, num_subnets=50,
        nodes_per_subnet=3, relevant_adjacent=4, initial_infected=2,
        max_steps=50, seed=11, jobs=1)
    ref = tmp_path / "ref.csv"
    experiments.sweep_two(config).write_csv(ref)
    assert blobs[0] == ref.read_bytes()
    capsys.readouterr()


def test_sweep2_rejects_bad_pair_and_step(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep2", "--pair", "global-remote", "--out",
                 str(out)]) == 1
    assert main(["sweep2", "--pair", "global-local", "--step", "0",
                 "--subnets", "50", "--nodes-per-subnet", "3",
                 "--seed", "1", "--out", str(out)]) == 1
    capsys.readouterr()


def test_sweep3_covers_the_simplex(tmp_path, capsys):
    out = tmp_path / "s3.csv"
    runs_out = tmp_path / "s3_runs.csv"
    assert main(["sweep3", "--step", "0.5", "--runs", "1",
                 "--subnets", "50", "--nodes-per-subnet", "3",
                 "--max-steps", "50", "--seed", "11", "--jobs", "1",
                 "--out", str(out), "--runs-out", str(runs_out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 6
    assert len(runs_out.read_text().splitlines()) == 1 + 6
    assert "6 grid points x 1 runs" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# whatif-tau


def test_whatif_tau_matches_library(tmp_path, capsys):
    out = tmp_path / "whatif.csv"
    assert main(["whatif-tau", "--tau", "120", "156.25", "--steps", "72",
                 "--out", str(out)]) == 0
    rows = experiments.whatif_recovery(CONFICKER_2008, OUTBREAK_2008_TOPOLOGY,
                                       OUTBREAK_2008_INIT,
                                       [120.0, 156.25], 72)
    ref = tmp_path / "ref.csv"
    experiments.write_whatif_csv(ref, rows)
    assert out.read_bytes() == ref.read_bytes()
    assert "tau = 120 min" in capsys.readouterr().out


def test_whatif_tau_below_window_is_usage_error(tmp_path, capsys):
    out = tmp_path / "whatif.csv"
    assert main(["whatif-tau", "--tau", "5", "--out", str(out)]) == 1
    assert "tau" in capsys.readouterr().err
