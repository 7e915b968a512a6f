"""Command-line front end.

One executable, ``hybridworm``, with a subcommand per capability: infer
parameters from a telescope log, predict an outbreak, run single
simulations, sweep mixing probabilities, what-if the recovery time, and
generate synthetic telescope logs.

Exit codes: 0 success, 1 usage error (bad flags or flag values), 2 data
error (unreadable or unusable input data).  Parameter precedence is CLI
flags over ``--config`` file over the built-in preset.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import experiments, stochastic, telescope
from .model import (OUTBREAK_2008_INIT, OUTBREAK_2008_TOPOLOGY, PRESETS,
                    DegenerateRatesError, InconsistentRatesError, MacroState,
                    ModelParams, Topology, read_params_file)

_PARAM_FIELDS = ("alpha_g", "alpha_l", "alpha_n", "beta_g", "beta_l",
                 "beta_n", "gamma", "lam")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; our contract reserves 2 for data
    # errors, so route usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_param_flags(parser):
    group = parser.add_argument_group(
        "model parameters (override --config and --preset)")
    group.add_argument("--preset", choices=sorted(PRESETS),
                       default="conficker-2008",
                       help="built-in parameter set (default: %(default)s)")
    group.add_argument("--config", metavar="FILE",
                       help="flat key = value parameter file")
    for name in _PARAM_FIELDS:
        flag = "--" + name.replace("_", "-")
        if name == "lam":
            group.add_argument("--lam", "--lambda", dest="lam", type=float,
                               help="probes per infected node per window")
        else:
            group.add_argument(flag, type=float, help=argparse.SUPPRESS)


def _resolve_params(args) -> ModelParams:
    params = PRESETS[args.preset]
    if args.config:
        try:
            params = read_params_file(args.config)
        except OSError as exc:
            raise DataError(f"cannot read config: {exc}") from exc
        except ValueError as exc:
            raise DataError(f"bad config: {exc}") from exc
    overrides = {name: getattr(args, name) for name in _PARAM_FIELDS
                 if getattr(args, name) is not None}
    if overrides:
        merged = {name: getattr(params, name) for name in _PARAM_FIELDS}
        merged.update(overrides)
        try:
            params = ModelParams(**merged)
        except ValueError as exc:
            raise UsageError(f"invalid parameter overrides: {exc}") from exc
    return params


def _add_seed_flag(parser):
    parser.add_argument("--seed", type=int,
                        help="master seed (default: random, printed)")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy) & (2 ** 63 - 1)
    print(f"seed = {seed}")
    return seed


def _add_sim_topology_flags(parser):
    group = parser.add_argument_group("simulation topology")
    group.add_argument("--subnets", type=int,
                       default=experiments.DESK_SUBNETS,
                       help="number of subnets (default: %(default)s)")
    group.add_argument("--nodes-per-subnet", type=int,
                       default=experiments.DESK_NODES_PER_SUBNET,
                       help="relevant nodes per subnet (default: %(default)s)")
    group.add_argument("--relevant-adjacent", type=int,
                       default=experiments.DESK_RELEVANT_ADJACENT,
                       help="relevant subnets among the ten predecessors "
                            "(default: %(default)s)")


def _add_meanfield_flags(parser):
    group = parser.add_argument_group("mean-field geometry and initial state")
    group.add_argument("--subnets", type=float,
                       default=OUTBREAK_2008_TOPOLOGY.num_subnets,
                       help="populated subnet count N (default: %(default)s)")
    group.add_argument("--nodes-per-subnet", type=float,
                       default=OUTBREAK_2008_TOPOLOGY.nodes_per_subnet,
                       help="mean nodes per subnet (default: %(default)s)")
    group.add_argument("--relevant-neighbours", type=float,
                       default=OUTBREAK_2008_TOPOLOGY.relevant_neighbours,
                       help="mean populated predecessors N+ "
                            "(default: %(default)s)")
    group.add_argument("--init-s", type=float, default=OUTBREAK_2008_INIT.S,
                       help="initial susceptible count (default: %(default)s)")
    group.add_argument("--init-i", type=float, default=OUTBREAK_2008_INIT.I,
                       help="initial infected count (default: %(default)s)")
    group.add_argument("--init-r", type=float, default=OUTBREAK_2008_INIT.R,
                       help="initial recovered count (default: %(default)s)")


def _meanfield_inputs(args) -> tuple[Topology, MacroState]:
    topo = Topology(num_subnets=args.subnets,
                    nodes_per_subnet=args.nodes_per_subnet,
                    relevant_neighbours=args.relevant_neighbours)
    init = MacroState(t=0, S=args.init_s, I=args.init_i, R=args.init_r)
    return topo, init


def _build_sim_topology(args, seed: int) -> stochastic.SimTopology:
    return stochastic.build_topology(
        args.subnets, args.nodes_per_subnet, args.relevant_adjacent,
        experiments.topology_seed(seed))


def _print_params(params: ModelParams, stream=None) -> None:
    stream = stream or sys.stdout
    values = {name: getattr(params, name) for name in _PARAM_FIELDS}
    values["lambda"] = values.pop("lam")
    for key in ("alpha_g", "alpha_l", "alpha_n", "beta_g", "beta_l",
                "beta_n", "gamma", "lambda"):
        print(f"{key} = {values[key]:.6g}", file=stream)


def cmd_infer(args) -> int:
    result = telescope.infer_from_log(args.log, args.baseline or (),
                                      window_seconds=args.window,
                                      t_start=args.t_start,
                                      t_end=args.t_end)
    print(f"windows [{result.t_start}, {result.t_end}], "
          f"{result.n_usable} usable")
    _print_params(result.params)
    for key, value in sorted(result.diagnostics.items()):
        if isinstance(value, float):
            print(f"{key} = {value:.6g}")
        else:
            print(f"{key} = {value}")
    if args.out:
        result.write_params_file(args.out)
    return 0


def cmd_predict(args) -> int:
    params = _resolve_params(args)
    topo, init = _meanfield_inputs(args)
    traj = experiments.predict_outbreak(params, topo, init, args.steps)
    traj.write_csv(args.out)
    print(f"S = {traj.S[-1]:.6g}, I = {traj.I[-1]:.6g}, "
          f"R = {traj.R[-1]:.6g} after {args.steps} steps")
    return 0


def cmd_simulate(args) -> int:
    params = _resolve_params(args)
    seed = _resolve_seed(args)
    topo = _build_sim_topology(args, seed)
    result = stochastic.run_sim(params, topo, args.initial_infected,
                                args.max_steps, seed)
    m = result.metrics
    print(f"final_size = {m.final_size}")
    print(f"size_at_100 = {m.size_at_100}")
    print(f"survival_time = {m.survival_time}")
    print(f"speed = {m.speed:.6g}")
    if args.out:
        result.trajectory.write_csv(args.out)
    if args.metrics_out:
        stochastic.write_metrics_csv(
            args.metrics_out,
            [(params.alpha_g, params.alpha_l, params.alpha_n, m, seed)])
    return 0


def _sweep_config(args, pair) -> experiments.SweepConfig:
    try:
        return experiments.SweepConfig(
            pair=pair, step=args.step, runs=args.runs,
            num_subnets=args.subnets,
            nodes_per_subnet=args.nodes_per_subnet,
            relevant_adjacent=args.relevant_adjacent,
            initial_infected=args.initial_infected,
            max_steps=args.max_steps, seed=_resolve_seed(args),
            base=_resolve_params(args), jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_sweep2(args) -> int:
    result = experiments.sweep_two(_sweep_config(args, args.pair))
    result.write_csv(args.out)
    if args.runs_out:
        result.write_runs_csv(args.runs_out)
    print(f"{len(result.alphas)} grid points x {args.runs} runs -> "
          f"{args.out}")
    return 0


def cmd_sweep3(args) -> int:
    result = experiments.sweep_three(_sweep_config(args, None))
    result.write_csv(args.out)
    if args.runs_out:
        result.write_runs_csv(args.runs_out)
    print(f"{len(result.alphas)} grid points x {args.runs} runs -> "
          f"{args.out}")
    return 0


def cmd_whatif_tau(args) -> int:
    params = _resolve_params(args)
    topo, init = _meanfield_inputs(args)
    try:
        rows = experiments.whatif_recovery(params, topo, init, args.tau,
                                           args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    experiments.write_whatif_csv(args.out, rows)
    for tau, s, i, r in rows:
        print(f"tau = {tau:g} min: S = {s:.6g}, I = {i:.6g}, R = {r:.6g}")
    return 0


def cmd_gen_log(args) -> int:
    params = _resolve_params(args)
    seed = _resolve_seed(args)
    topo = _build_sim_topology(args, seed)
    log = stochastic.generate_telescope_log(
        params, topo, args.initial_infected, args.steps,
        args.monitor_fraction, seed)
    log.write_csv(args.out)
    if args.trajectory_out:
        log.trajectory.write_csv(args.trajectory_out)
    print(f"{len(log)} events over {len(log.trajectory) - 1} steps -> "
          f"{args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridworm",
                     description="Hybrid-spreading worm epidemics: "
                                 "simulate, infer, predict, sweep.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("infer", help="infer parameters from a telescope log")
    p.add_argument("log", help="event log CSV (timestamp,source_addr)")
    p.add_argument("--baseline", action="append", metavar="FILE",
                   help="pre-outbreak capture; its sources are background "
                        "(repeatable)")
    p.add_argument("--window", type=int, default=telescope.WINDOW_SECONDS,
                   help="aggregation window in seconds (default: %(default)s)")
    p.add_argument("--t-start", type=int, help="first averaging window")
    p.add_argument("--t-end", type=int, help="last averaging window")
    p.add_argument("--out", help="write inferred parameters to this file")
    p.set_defaults(handler=cmd_infer)

    p = sub.add_parser("predict", help="mean-field outbreak prediction")
    _add_param_flags(p)
    _add_meanfield_flags(p)
    p.add_argument("--steps", type=int, default=72,
                   help="10-minute windows to run (default: %(default)s)")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("simulate", help="one stochastic run")
    _add_param_flags(p)
    _add_sim_topology_flags(p)
    _add_seed_flag(p)
    p.add_argument("--initial-infected", type=int, default=2,
                   help="seeded nodes at t=0 (default: %(default)s)")
    p.add_argument("--max-steps", type=int, default=5000,
                   help="step cap (default: %(default)s)")
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--metrics-out", help="metrics CSV path")
    p.set_defaults(handler=cmd_simulate)

    for name, pair_flag in (("sweep2", True), ("sweep3", False)):
        p = sub.add_parser(name,
                           help="two-mechanism sweep" if pair_flag
                           else "three-mechanism simplex sweep")
        _add_param_flags(p)
        _add_sim_topology_flags(p)
        _add_seed_flag(p)
        if pair_flag:
            p.add_argument("--pair", required=True,
                           choices=experiments.PAIRS,
                           help="mechanism pair to mix")
            p.add_argument("--step", type=float, default=0.05,
                           help="grid step (default: %(default)s)")
        else:
            p.add_argument("--step", type=float, default=0.1,
                           help="grid step (default: %(default)s)")
        p.add_argument("--runs", type=int, default=20,
                       help="runs per grid point (default: %(default)s)")
        p.add_argument("--initial-infected", type=int, default=2,
                       help="seeded nodes at t=0 (default: %(default)s)")
        p.add_argument("--max-steps", type=int, default=5000,
                       help="step cap per run (default: %(default)s)")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: all cores)")
        p.add_argument("--out", required=True, help="aggregated sweep CSV")
        p.add_argument("--runs-out", help="per-run metrics CSV")
        p.set_defaults(handler=cmd_sweep2 if pair_flag else cmd_sweep3)

    p = sub.add_parser("whatif-tau",
                       help="mean-field horizon vs recovery time")
    _add_param_flags(p)
    _add_meanfield_flags(p)
    p.add_argument("--tau", type=float, nargs="+", required=True,
                   metavar="MINUTES", help="recovery times to evaluate")
    p.add_argument("--steps", type=int, default=72,
                   help="10-minute windows to run (default: %(default)s)")
    p.add_argument("--out", required=True, help="what-if CSV path")
    p.set_defaults(handler=cmd_whatif_tau)

    p = sub.add_parser("gen-log", help="synthetic telescope log")
    _add_param_flags(p)
    _add_sim_topology_flags(p)
    _add_seed_flag(p)
    p.add_argument("--initial-infected", type=int, default=2,
                   help="seeded nodes at t=0 (default: %(default)s)")
    p.add_argument("--steps", type=int, default=400,
                   help="windows to simulate (default: %(default)s)")
    p.add_argument("--monitor-fraction", type=float, default=1.0 / 256,
                   help="monitored share of the global space "
                        "(default: 1/256)")
    p.add_argument("--out", required=True, help="event log CSV path")
    p.add_argument("--trajectory-out", help="ground-truth trajectory CSV")
    p.set_defaults(handler=cmd_gen_log)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code else 0
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError, telescope.NoUsableWindowsError,
            DegenerateRatesError, InconsistentRatesError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
