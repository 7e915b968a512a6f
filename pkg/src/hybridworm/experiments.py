"""Mixing-probability experiments over the stochastic engine.

Two-mechanism sweeps walk one alpha along [0, 1] with a second mechanism
taking the remainder; the three-mechanism sweep covers the whole simplex.
Every (grid point, run) pair gets a seed derived from the master seed and
its indices, so a sweep is reproducible run for run regardless of worker
count or scheduling.  The recovery-time what-if and the outbreak
prediction are thin mean-field wrappers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import (CONFICKER_2008, WINDOW_MINUTES, MacroState, ModelParams,
                    Topology, Trajectory, run_meanfield)
from .seeds import derive_seed
from .stochastic import SimTopology, build_topology, run_sim
from . import stochastic

PAIRS = ("global-local", "global-neighbourhood", "local-neighbourhood")

# Desk-scale topology: a fifth of the outbreak-scale subnet count keeps
# hundred-run sweeps in minutes; qualitative sweep behavior survives the
# shrinkage except where noted in the experiment scripts.
DESK_SUBNETS = 10_000
DESK_NODES_PER_SUBNET = 5
DESK_RELEVANT_ADJACENT = 4

_TOPOLOGY_PATH = 101  # seed-path tag reserved for topology construction


def topology_seed(master_seed: int) -> int:
    """Topology seed derived from a master seed (separate from run seeds)."""
    return derive_seed(master_seed, _TOPOLOGY_PATH)


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a grid over mixing probabilities plus run bookkeeping."""

    pair: str | None = None       # None = full three-mechanism simplex
    step: float = 0.05
    runs: int = 20
    num_subnets: int = DESK_SUBNETS
    nodes_per_subnet: int = DESK_NODES_PER_SUBNET
    relevant_adjacent: int = DESK_RELEVANT_ADJACENT
    initial_infected: int = 2
    max_steps: int = 5000
    seed: int = 0
    base: ModelParams = CONFICKER_2008
    jobs: int = 1

    def __post_init__(self):
        if self.pair is not None and self.pair not in PAIRS:
            raise ValueError(f"pair must be one of {PAIRS} or None")
        if not 0.0 < self.step <= 1.0:
            raise ValueError("step must be in (0, 1]")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def topology_seed(self) -> int:
        return topology_seed(self.seed)

    def build(self) -> SimTopology:
        return build_topology(self.num_subnets, self.nodes_per_subnet,
                              self.relevant_adjacent, self.topology_seed())


def _axis(step: float) -> np.ndarray:
    count = int(round(1.0 / step))
    return np.round(np.linspace(0.0, 1.0, count + 1), 12)


def two_mechanism_grid(pair: str, step: float) -> np.ndarray:
    """(P, 3) rows of (alpha_g, alpha_l, alpha_n) along one simplex edge."""
    a = _axis(step)
    b = np.round(1.0 - a, 12)
    zero = np.zeros_like(a)
    columns = {"global-local": (a, b, zero),
               "global-neighbourhood": (a, zero, b),
               "local-neighbourhood": (zero, a, b)}[pair]
    return np.column_stack(columns)


def three_mechanism_grid(step: float) -> np.ndarray:
    """(P, 3) simplex grid rows with alpha_n = 1 - alpha_g - alpha_l."""
    a = _axis(step)
    rows = []
    for g in a:
        for l in a:
            n = round(1.0 - g - l, 12)
            if n >= -1e-12:
                rows.append((g, l, max(n, 0.0)))
    return np.array(rows)


@dataclass(eq=False)
class SweepResult:
    """Aggregated metrics per grid point, plus the raw per-run values."""

    alphas: np.ndarray        # (P, 3)
    mean: np.ndarray          # (P, 4): final, size100, survival, speed
    sd: np.ndarray            # (P, 4), sample sd (ddof=1), 0 when runs=1
    per_run: np.ndarray       # (P, runs, 4)
    seeds: np.ndarray         # (P, runs) uint64
    config: SweepConfig

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("alpha_g,alpha_l,alpha_n,mean_final,sd_final,"
                     "mean_size100,sd_size100,mean_survival,sd_survival,"
                     "mean_speed,sd_speed\n")
            for alphas, mean, sd in zip(self.alphas, self.mean, self.sd):
                cells = [f"{v:.17g}" for v in alphas]
                for m, s in zip(mean, sd):
                    cells.append(f"{m:.17g}")
                    cells.append(f"{s:.17g}")
                fh.write(",".join(cells) + "\n")

    def write_runs_csv(self, path) -> None:
        rows = []
        for p, alphas in enumerate(self.alphas):
            for r in range(self.per_run.shape[1]):
                final, size100, survival, speed = self.per_run[p, r]
                metrics = stochastic.OutbreakMetrics(
                    final_size=int(final), size_at_100=int(size100),
                    survival_time=int(survival), speed=float(speed))
                rows.append((*alphas, metrics, int(self.seeds[p, r])))
        stochastic.write_metrics_csv(path, rows)


_TOPO_CACHE: dict = {}


def _cached_topology(key) -> SimTopology:
    topo = _TOPO_CACHE.get(key)
    if topo is None:
        topo = build_topology(*key)
        _TOPO_CACHE[key] = topo
    return topo


def _run_point(task):
    """One grid point's runs; a top-level function so pools can pick it up."""
    (topo_key, base, alphas, initial_infected, max_steps, seeds) = task
    topo = _cached_topology(topo_key)
    params = base.with_alphas(*alphas)
    out = np.empty((len(seeds), 4))
    for r, seed in enumerate(seeds):
        m = run_sim(params, topo, initial_infected, max_steps, seed).metrics
        out[r] = (m.final_size, m.size_at_100, m.survival_time, m.speed)
    return out


def _run_sweep(config: SweepConfig, alphas: np.ndarray) -> SweepResult:
    points = len(alphas)
    seeds = np.empty((points, config.runs), dtype=np.uint64)
    for p in range(points):
        for r in range(config.runs):
            seeds[p, r] = derive_seed(config.seed, p, r)
    topo_key = (config.num_subnets, config.nodes_per_subnet,
                config.relevant_adjacent, config.topology_seed())
    tasks = [(topo_key, config.base, tuple(alphas[p]),
              config.initial_infected, config.max_steps,
              [int(s) for s in seeds[p]])
             for p in range(points)]

    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]

    per_run = np.stack(results)  # grid order, not completion order
    mean = per_run.mean(axis=1)
    if config.runs > 1:
        sd = per_run.std(axis=1, ddof=1)
    else:
        sd = np.zeros_like(mean)
    return SweepResult(alphas=alphas, mean=mean, sd=sd, per_run=per_run,
                       seeds=seeds, config=config)


def sweep_two(config: SweepConfig) -> SweepResult:
    """Walk one mechanism pair along the simplex edge."""
    if config.pair is None:
        raise ValueError("sweep_two needs config.pair")
    return _run_sweep(config, two_mechanism_grid(config.pair, config.step))


def sweep_three(config: SweepConfig) -> SweepResult:
    """Cover the full mixing simplex."""
    return _run_sweep(config, three_mechanism_grid(config.step))


def predict_outbreak(params: ModelParams, topo: Topology, init: MacroState,
                     steps: int) -> Trajectory:
    """Mean-field outbreak prediction from a measured initial condition."""
    return run_meanfield(params, topo, init, steps)


def whatif_recovery(params: ModelParams, topo: Topology, init: MacroState,
                    taus, steps: int) -> list:
    """Re-run the prediction with recovery time tau minutes (gamma = 10/tau).

    Returns (tau, S, I, R) at the horizon for each tau, in input order.
    """
    rows = []
    for tau in taus:
        if tau < WINDOW_MINUTES:
            raise ValueError(
                f"tau={tau!r} below one {WINDOW_MINUTES:g}-minute window "
                "implies a recovery probability above 1")
        gamma = WINDOW_MINUTES / tau
        what = ModelParams(alpha_g=params.alpha_g, alpha_l=params.alpha_l,
                           alpha_n=params.alpha_n, beta_g=params.beta_g,
                           beta_l=params.beta_l, beta_n=params.beta_n,
                           gamma=gamma, lam=params.lam)
        traj = run_meanfield(what, topo, init, steps)
        rows.append((float(tau), float(traj.S[-1]), float(traj.I[-1]),
                     float(traj.R[-1])))
    return rows


def write_whatif_csv(path, rows) -> None:
    with open(path, "w") as fh:
        fh.write("tau_minutes,S,I,R\n")
        for tau, s, i, r in rows:
            fh.write(f"{tau:.17g},{s:.17g},{i:.17g},{r:.17g}\n")
