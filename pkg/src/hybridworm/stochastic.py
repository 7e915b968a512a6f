"""Per-node stochastic engine for the three-mechanism spreading process.

Nodes live in an explicit ring of /24 subnets; only relevant (infectable)
nodes are instantiated, the rest of the address space enters through the
probe-space denominators.  Each step every infected node draws one
mechanism (global / local / neighbourhood) and exposes the susceptible
nodes in that scope independently with the mechanism's beta.  The engine
is vectorised: per-scope prober counts are aggregated per subnet and each
susceptible node is exposed once to the union of the probes aimed at it,
which is distributionally identical to looping over probers.

Also provides the synthetic telescope: a monitored block disjoint from
every relevant subnet, so only globally aimed probes are observable, each
landing in the monitor with probability monitor_fraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (MECH_GLOBAL, MECH_LOCAL, MECH_NEIGH, ModelParams,
                    Topology, Trajectory, _escape)
from .seeds import derive_seed

_STATUS_S, _STATUS_I, _STATUS_R = 0, 1, 2

# Synthetic logs embed subnet i at /24 prefix BASE + (num_subnets-1-i):
# ring predecessors (the subnets a node probes) then carry the ten prefixes
# directly below the victim's own, which is where a log analyst would look
# for neighbourhood sources.
SYNTH_BASE_PREFIX = 1 << 16

_STREAM_EPIDEMIC = 0
_STREAM_OBSERVER = 1


@dataclass(frozen=True, eq=False)
class SimTopology:
    """Explicit ring of subnets with per-subnet relevant neighbour lists.

    neighbours[i] holds the `relevant_adjacent` subnet indices, sampled
    from i's ten ring predecessors, that node probes reach when subnet i
    chooses the neighbourhood mechanism.
    """

    num_subnets: int
    nodes_per_subnet: int
    relevant_adjacent: int
    seed: int
    neighbours: np.ndarray  # (num_subnets, relevant_adjacent) int32

    def __post_init__(self):
        if self.neighbours.shape != (self.num_subnets, self.relevant_adjacent):
            raise ValueError("neighbour table shape mismatch")

    @property
    def total_nodes(self) -> int:
        return self.num_subnets * self.nodes_per_subnet

    def macro(self) -> Topology:
        """Mean-field view of this geometry (N+ = relevant_adjacent)."""
        return Topology(num_subnets=self.num_subnets,
                        nodes_per_subnet=float(self.nodes_per_subnet),
                        relevant_neighbours=float(self.relevant_adjacent))


def build_topology(num_subnets: int, nodes_per_subnet: int,
                   relevant_adjacent: int, seed: int) -> SimTopology:
    """Sample each subnet's relevant neighbours from its 10 predecessors.

    The ring wraps: subnet 0's predecessors are num_subnets-1, ... The
    sampled lists are sorted, so relevant_adjacent=10 yields the same
    table for every seed.
    """
    if num_subnets <= 10:
        raise ValueError("num_subnets must exceed the neighbourhood size 10")
    if not 1 <= nodes_per_subnet <= 254:
        raise ValueError("nodes_per_subnet must be in [1, 254]")
    if not 0 <= relevant_adjacent <= 10:
        raise ValueError("relevant_adjacent must be in [0, 10]")
    rng = np.random.default_rng(derive_seed(seed))
    offsets = np.tile(np.arange(1, 11, dtype=np.int64), (num_subnets, 1))
    offsets = rng.permuted(offsets, axis=1)[:, :relevant_adjacent]
    subnet_ids = np.arange(num_subnets, dtype=np.int64)[:, None]
    neighbours = np.sort((subnet_ids - offsets) % num_subnets, axis=1)
    return SimTopology(num_subnets=num_subnets,
                       nodes_per_subnet=nodes_per_subnet,
                       relevant_adjacent=relevant_adjacent,
                       seed=seed,
                       neighbours=neighbours.astype(np.int32))


@dataclass(eq=False)
class MicroState:
    """Mutable per-node state of one stochastic run.

    node_status holds 0=susceptible, 1=infected, 2=recovered.  The
    infection log records every infection after t=0 as (step, node,
    mechanism) rows; initial seeds are not logged (they have no cause).
    """

    t: int
    node_status: np.ndarray           # (total_nodes,) int8
    per_subnet_infected: np.ndarray   # (num_subnets,) int32
    first_infected: np.ndarray        # (total_nodes,) int32, -1 = never
    recovered_step: np.ndarray        # (total_nodes,) int32, -1 = never
    _log_chunks: list = field(default_factory=list)

    @property
    def infection_log(self) -> np.ndarray:
        """(n_events, 3) int64 rows of (step, node, mechanism)."""
        if not self._log_chunks:
            return np.empty((0, 3), dtype=np.int64)
        return np.concatenate(self._log_chunks, axis=0)

    def counts(self) -> tuple[int, int, int]:
        c = np.bincount(self.node_status, minlength=3)
        return int(c[_STATUS_S]), int(c[_STATUS_I]), int(c[_STATUS_R])

    def check_consistency(self, topo: SimTopology) -> None:
        """Debug invariant: per-subnet counters match node statuses."""
        infected = np.flatnonzero(self.node_status == _STATUS_I)
        expect = np.bincount(infected // topo.nodes_per_subnet,
                             minlength=topo.num_subnets)
        if not np.array_equal(expect, self.per_subnet_infected):
            raise AssertionError("per_subnet_infected out of sync")


def initial_state(topo: SimTopology, initial_infected: int,
                  rng: np.random.Generator) -> MicroState:
    """All susceptible except `initial_infected` uniformly chosen nodes."""
    total = topo.total_nodes
    if not 0 <= initial_infected <= total:
        raise ValueError("initial_infected must be in [0, total nodes]")
    status = np.zeros(total, dtype=np.int8)
    first = np.full(total, -1, dtype=np.int32)
    seeds = rng.choice(total, size=initial_infected, replace=False)
    status[seeds] = _STATUS_I
    first[seeds] = 0
    per_subnet = np.bincount(seeds // topo.nodes_per_subnet,
                             minlength=topo.num_subnets).astype(np.int32)
    return MicroState(t=0, node_status=status, per_subnet_infected=per_subnet,
                      first_infected=first,
                      recovered_step=np.full(total, -1, dtype=np.int32))


def _step_core(state: MicroState, params: ModelParams, topo: SimTopology,
               rng: np.random.Generator) -> np.ndarray:
    """Advance one window in place; return the global-prober node ids.

    Draw order is fixed (mechanisms, frontier exposures, global binomial,
    global victims, recoveries) so a seed reproduces a run exactly.
    """
    n = topo.nodes_per_subnet
    infected = np.flatnonzero(state.node_status == _STATUS_I)
    t_next = state.t + 1
    state.t = t_next
    if infected.size == 0:
        return infected

    # One mechanism per infected node per step.
    edges = np.array([params.alpha_g, params.alpha_g + params.alpha_l])
    mech = np.searchsorted(edges, rng.random(infected.size), side="right")
    global_probers = infected[mech == MECH_GLOBAL]

    # Per-subnet prober counts seen by a susceptible: L from its own
    # subnet's local probers, M from neighbourhood probers that list it.
    local_sub = infected[mech == MECH_LOCAL] // n
    L = np.bincount(local_sub, minlength=topo.num_subnets)
    neigh_sub = infected[mech == MECH_NEIGH] // n
    if neigh_sub.size:
        targets = topo.neighbours[neigh_sub]
        M = np.bincount(targets.ravel(), minlength=topo.num_subnets)
    else:
        M = np.zeros(topo.num_subnets, dtype=np.int64)

    p_global = 1.0 - _escape(params.beta_g, global_probers.size)

    susceptible = np.flatnonzero(state.node_status == _STATUS_S)
    sus_subnet = susceptible // n
    on_frontier = (L[sus_subnet] > 0) | (M[sus_subnet] > 0)
    frontier = susceptible[on_frontier]
    rest = susceptible[~on_frontier]

    new_nodes = []
    new_mechs = []
    if frontier.size:
        # Union exposure with per-mechanism hit indicators, so each
        # infection keeps a ground-truth mechanism label (ties broken
        # local > neighbourhood > global).
        fsub = frontier // n
        p_local = -np.expm1(L[fsub] * np.log1p(-params.beta_l)) \
            if params.beta_l < 1.0 else (L[fsub] > 0).astype(float)
        p_neigh = -np.expm1(M[fsub] * np.log1p(-params.beta_n)) \
            if params.beta_n < 1.0 else (M[fsub] > 0).astype(float)
        draws = rng.random((3, frontier.size))
        hit_l = draws[0] < p_local
        hit_n = draws[1] < p_neigh
        hit_g = draws[2] < p_global
        hit_any = hit_l | hit_n | hit_g
        if np.any(hit_any):
            nodes = frontier[hit_any]
            mechs = np.where(hit_l[hit_any], MECH_LOCAL,
                             np.where(hit_n[hit_any], MECH_NEIGH,
                                      MECH_GLOBAL)).astype(np.int64)
            new_nodes.append(nodes)
            new_mechs.append(mechs)
    if rest.size and p_global > 0.0:
        # Off the frontier only global probes apply and every node shares
        # one hit probability: draw the count, then the victims.
        count = rng.binomial(rest.size, p_global)
        if count:
            nodes = rest[rng.choice(rest.size, size=count, replace=False)]
            new_nodes.append(nodes)
            new_mechs.append(np.full(count, MECH_GLOBAL, dtype=np.int64))

    recover = infected[rng.random(infected.size) < params.gamma]

    if new_nodes:
        nodes = np.concatenate(new_nodes)
        mechs = np.concatenate(new_mechs)
        state.node_status[nodes] = _STATUS_I
        state.first_infected[nodes] = t_next
        np.add.at(state.per_subnet_infected, nodes // n, 1)
        log = np.empty((nodes.size, 3), dtype=np.int64)
        log[:, 0] = t_next
        log[:, 1] = nodes
        log[:, 2] = mechs
        state._log_chunks.append(log)
    if recover.size:
        state.node_status[recover] = _STATUS_R
        state.recovered_step[recover] = t_next
        np.add.at(state.per_subnet_infected, recover // n, -1)
    return global_probers


def sim_step(state: MicroState, params: ModelParams, topo: SimTopology,
             rng: np.random.Generator) -> MicroState:
    """One window of the stochastic process (mutates and returns state)."""
    _step_core(state, params, topo, rng)
    return state


@dataclass(frozen=True)
class OutbreakMetrics:
    """Summary of one run, the quantities the sweeps aggregate."""

    final_size: int      # R at termination = nodes ever infected
    size_at_100: int     # I + R at step 100 (or at the end if shorter)
    survival_time: int   # last step with I > 0
    speed: float         # final_size / max(survival_time, 1)


@dataclass(eq=False)
class SimResult:
    metrics: OutbreakMetrics
    trajectory: Trajectory
    state: MicroState


def _metrics_from_trajectory(traj: Trajectory) -> OutbreakMetrics:
    ever = traj.I + traj.R
    final_size = int(ever[-1])
    size_at_100 = int(ever[min(100, len(ever) - 1)])
    alive = np.flatnonzero(traj.I > 0)
    survival = int(alive[-1]) if alive.size else 0
    return OutbreakMetrics(final_size=final_size, size_at_100=size_at_100,
                           survival_time=survival,
                           speed=final_size / max(survival, 1))


def run_sim(params: ModelParams, topo: SimTopology, initial_infected: int,
            max_steps: int, seed: int) -> SimResult:
    """Run until extinction or max_steps; trajectory row 0 is the seeding."""
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    rng = np.random.default_rng(derive_seed(seed, _STREAM_EPIDEMIC))
    state = initial_state(topo, initial_infected, rng)
    s, i, r = state.counts()
    ss, ii, rr = [s], [i], [r]
    while state.t < max_steps and ii[-1] > 0:
        _step_core(state, params, topo, rng)
        s, i, r = state.counts()
        ss.append(s)
        ii.append(i)
        rr.append(r)
    traj = Trajectory(t=np.arange(len(ss), dtype=np.int64),
                      S=np.array(ss, dtype=np.int64),
                      I=np.array(ii, dtype=np.int64),
                      R=np.array(rr, dtype=np.int64))
    return SimResult(metrics=_metrics_from_trajectory(traj), trajectory=traj,
                     state=state)


def node_address(topo: SimTopology, nodes: np.ndarray) -> np.ndarray:
    """Synthetic 32-bit address of each node (host bytes 1..n)."""
    nodes = np.asarray(nodes, dtype=np.int64)
    prefix = SYNTH_BASE_PREFIX + (topo.num_subnets - 1 - nodes
                                  // topo.nodes_per_subnet)
    return prefix * 256 + nodes % topo.nodes_per_subnet + 1


@dataclass(eq=False)
class TelescopeLog:
    """Synthetic telescope capture plus the ground truth behind it."""

    timestamps: np.ndarray    # int64 epoch seconds, sorted
    source_addrs: np.ndarray  # int64 32-bit addresses, aligned
    trajectory: Trajectory
    metrics: OutbreakMetrics

    def __len__(self) -> int:
        return len(self.timestamps)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("timestamp,source_addr\n")
            for ts, addr in zip(self.timestamps, self.source_addrs):
                fh.write(f"{ts},{addr}\n")


def generate_telescope_log(params: ModelParams, topo: SimTopology,
                           initial_infected: int, steps: int,
                           monitor_fraction: float, seed: int,
                           ) -> TelescopeLog:
    """Run the epidemic and record probes landing in the monitored block.

    The monitor is disjoint from every relevant subnet, so only the probes
    of nodes that chose the global mechanism can be seen.  A node emits
    Poisson(lambda) probes per window, each landing in the monitor with
    probability monitor_fraction, hence Poisson(lambda * monitor_fraction)
    observed events per global-probing node-window, uniformly timestamped
    inside the window.  The epidemic stream is separate from the observer
    stream: the same seed reproduces run_sim's epidemic exactly.
    """
    if not 0.0 < monitor_fraction <= 1.0:
        raise ValueError("monitor_fraction must be in (0, 1]")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    rng_epi = np.random.default_rng(derive_seed(seed, _STREAM_EPIDEMIC))
    rng_obs = np.random.default_rng(derive_seed(seed, _STREAM_OBSERVER))
    state = initial_state(topo, initial_infected, rng_epi)
    rate = params.lam * monitor_fraction

    s, i, r = state.counts()
    ss, ii, rr = [s], [i], [r]
    ts_chunks, addr_chunks = [], []
    while state.t < steps and ii[-1] > 0:
        window = state.t
        probers = _step_core(state, params, topo, rng_epi)
        if probers.size:
            counts = rng_obs.poisson(rate, size=probers.size)
            emitters = np.repeat(probers, counts)
            if emitters.size:
                jitter = rng_obs.integers(0, 600, size=emitters.size)
                ts_chunks.append(window * 600 + jitter)
                addr_chunks.append(node_address(topo, emitters))
        s, i, r = state.counts()
        ss.append(s)
        ii.append(i)
        rr.append(r)

    traj = Trajectory(t=np.arange(len(ss), dtype=np.int64),
                      S=np.array(ss, dtype=np.int64),
                      I=np.array(ii, dtype=np.int64),
                      R=np.array(rr, dtype=np.int64))
    if ts_chunks:
        ts = np.concatenate(ts_chunks)
        addrs = np.concatenate(addr_chunks)
        order = np.argsort(ts, kind="stable")
        ts, addrs = ts[order], addrs[order]
    else:
        ts = np.empty(0, dtype=np.int64)
        addrs = np.empty(0, dtype=np.int64)
    return TelescopeLog(timestamps=ts, source_addrs=addrs, trajectory=traj,
                        metrics=_metrics_from_trajectory(traj))


def write_metrics_csv(path, rows) -> None:
    """Per-run metrics export.

    rows: iterables of (alpha_g, alpha_l, alpha_n, OutbreakMetrics, seed).
    """
    with open(path, "w") as fh:
        fh.write("alpha_g,alpha_l,alpha_n,final_size,size_at_100,"
                 "survival_time,speed,seed\n")
        for ag, al, an, m, seed in rows:
            fh.write(f"{ag:.17g},{al:.17g},{an:.17g},{m.final_size},"
                     f"{m.size_at_100},{m.survival_time},{m.speed:.17g},"
                     f"{seed}\n")
