"""Mean-field engine for a three-mechanism hybrid worm epidemic.

A worm spreads over a metapopulation of /24 subnets using three probing
scopes at once: the whole routable space (global), the infected node's own
subnet (local), and the ten preceding subnets (neighbourhood).  Per time
window (10 minutes) an infected node picks one scope with mixing
probabilities (alpha_g, alpha_l, alpha_n) and infects susceptible targets
in that scope with the scope's infection rate beta.  The deterministic
recurrence below evolves expected (S, I, R) counts; the algebra at the
bottom converts between effective per-source rates b_x = alpha_x * beta_x,
the probing frequency lambda, and the mixing probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

# Addresses probed per window by each mechanism.  The global space is 2^30,
# not 2^32: the worm's address generator only ever emits a quarter of the
# IPv4 space.
LOCAL_SPACE = 256
NEIGH_SPACE = 2560
GLOBAL_SPACE = 2 ** 30

# One time step everywhere is one 10-minute window.
WINDOW_MINUTES = 10.0

# Shared mechanism codes, used for ground-truth infection logs and for
# attribution of observed infections alike.
MECH_GLOBAL, MECH_LOCAL, MECH_NEIGH = 0, 1, 2
MECHANISM_NAMES = ("global", "local", "neighbourhood")

ALPHA_SUM_TOL = 1e-9


class DegenerateRatesError(ValueError):
    """All effective rates are zero; mixing probabilities are undefined."""


class InconsistentRatesError(ValueError):
    """Effective rates and mixing probabilities imply an invalid beta."""


@dataclass(frozen=True)
class ModelParams:
    """The nine epidemic parameters plus the probing frequency.

    alpha_*  mixing probabilities (per-step mechanism choice), sum to 1
    beta_*   per-probe-window infection rates, each in [0, 1]
    gamma    per-step recovery probability
    lam      average probes sent per infected node per step
    """

    alpha_g: float
    alpha_l: float
    alpha_n: float
    beta_g: float
    beta_l: float
    beta_n: float
    gamma: float
    lam: float = 0.0

    def __post_init__(self):
        for name in ("alpha_g", "alpha_l", "alpha_n",
                     "beta_g", "beta_l", "beta_n", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v!r} outside [0, 1]")
        if abs(self.alpha_g + self.alpha_l + self.alpha_n - 1.0) > ALPHA_SUM_TOL:
            raise ValueError(
                f"mixing probabilities must sum to 1, got "
                f"{self.alpha_g + self.alpha_l + self.alpha_n!r}")
        if self.lam < 0.0:
            raise ValueError(f"lam={self.lam!r} must be >= 0")

    def effective_rates(self) -> "EffectiveRates":
        return EffectiveRates(b_l=self.alpha_l * self.beta_l,
                              b_n=self.alpha_n * self.beta_n,
                              b_g=self.alpha_g * self.beta_g)

    def with_alphas(self, alpha_g: float, alpha_l: float,
                    alpha_n: float) -> "ModelParams":
        """Same betas/gamma/lam with a different mechanism mix."""
        return replace(self, alpha_g=alpha_g, alpha_l=alpha_l, alpha_n=alpha_n)


# Parameters of the November 2008 outbreak, per 10-minute window, as
# inferred from the first outbreak day.  lam and the alphas are rounded to
# the precision they were reported at, so algebraic round-trips through
# them hold to ~1%, not machine precision.
CONFICKER_2008 = ModelParams(
    alpha_g=0.891, alpha_l=0.053, alpha_n=0.056,
    beta_g=7.7e-8, beta_l=0.32, beta_n=0.032,
    gamma=0.064, lam=82.5,
)

PRESETS = {"conficker-2008": CONFICKER_2008}

# Observed geometry of the same outbreak: 430,135 nodes across 92,267
# subnets, 4.3 of every subnet's ten predecessors also populated.
OUTBREAK_2008_TOPOLOGY = None  # assigned below, after Topology is defined
OUTBREAK_2008_INIT = None      # 4:00 am initial condition, assigned below


@dataclass(frozen=True)
class Topology:
    """Mean-field metapopulation geometry.

    num_subnets          N, count of populated subnets
    nodes_per_subnet     mean nodes per subnet (fractional is fine here)
    relevant_neighbours  N+, mean populated subnets among ten predecessors
    """

    num_subnets: float
    nodes_per_subnet: float
    relevant_neighbours: float
    neighbourhood_size: int = 10
    local_space: int = LOCAL_SPACE
    neigh_space: int = NEIGH_SPACE
    global_space: int = GLOBAL_SPACE

    def __post_init__(self):
        if self.num_subnets < 1:
            raise ValueError("num_subnets must be >= 1")
        if self.nodes_per_subnet <= 0:
            raise ValueError("nodes_per_subnet must be > 0")
        if not 0.0 <= self.relevant_neighbours <= self.neighbourhood_size:
            raise ValueError("relevant_neighbours must lie in [0, 10]")
        if self.neighbourhood_size != 10:
            raise ValueError("neighbourhood_size is fixed at 10")
        if (self.local_space, self.neigh_space, self.global_space) != (
                LOCAL_SPACE, NEIGH_SPACE, GLOBAL_SPACE):
            raise ValueError("probe space sizes are fixed at (256, 2560, 2^30)")

    @property
    def total_nodes(self) -> float:
        return self.num_subnets * self.nodes_per_subnet


@dataclass(frozen=True)
class MacroState:
    """Real-valued (S, I, R) at step t; one step is one 10-minute window."""

    t: int
    S: float
    I: float
    R: float

    def __post_init__(self):
        if min(self.S, self.I, self.R) < 0.0:
            raise ValueError("compartment counts must be non-negative")

    @property
    def total(self) -> float:
        return self.S + self.I + self.R


@dataclass(frozen=True)
class EffectiveRates:
    """Per-source effective infection rates b_x = alpha_x * beta_x."""

    b_l: float
    b_n: float
    b_g: float

    def __post_init__(self):
        for name in ("b_l", "b_n", "b_g"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v!r} outside [0, 1]")


OUTBREAK_2008_TOPOLOGY = Topology(num_subnets=92267, nodes_per_subnet=4.7,
                                  relevant_neighbours=4.3)
OUTBREAK_2008_INIT = MacroState(t=0, S=423899.0, I=3945.0, R=2291.0)


def _escape(rate: float, sources: float) -> float:
    """(1 - rate)^sources, stable for rate ~ 1e-8 against huge exponents."""
    if sources == 0.0 or rate == 0.0:
        return 1.0
    if rate >= 1.0:
        return 0.0
    return math.exp(sources * math.log1p(-rate))


def escape_probabilities(params: ModelParams, state: MacroState,
                         topo: Topology) -> tuple[float, float, float]:
    """Per-mechanism probabilities that a susceptible node is NOT infected.

    A susceptible node faces I(t) global probers across the whole space,
    I_N(t) = I/N local probers in its own subnet, and I+(t) = I_N * N+
    neighbourhood probers in its ten predecessor subnets:

        P_g = (1 - alpha_g beta_g)^I
        P_l = (1 - alpha_l beta_l)^I_N
        P_n = (1 - alpha_n beta_n)^I+

    Exponents are real-valued: mean-field counts are expectations.
    """
    rates = params.effective_rates()
    i_n = state.I / topo.num_subnets
    i_plus = i_n * topo.relevant_neighbours
    p_g = _escape(rates.b_g, state.I)
    p_l = _escape(rates.b_l, i_n)
    p_n = _escape(rates.b_n, i_plus)
    return p_g, p_l, p_n


def meanfield_step(params: ModelParams, state: MacroState,
                   topo: Topology) -> MacroState:
    """One window of the deterministic recurrence.

    With P = P_g P_l P_n the combined escape probability, S(t)[1 - P] nodes
    are newly infected and gamma I(t) recover:

        S(t+1) = S(t) - S(t)[1 - P]
        I(t+1) = I(t) + S(t)[1 - P] - gamma I(t)
        R(t+1) = R(t) + gamma I(t)

    S + I + R is conserved exactly.
    """
    p_g, p_l, p_n = escape_probabilities(params, state, topo)
    p = p_g * p_l * p_n
    new_infections = state.S * (1.0 - p)
    recoveries = params.gamma * state.I
    return MacroState(t=state.t + 1,
                      S=state.S - new_infections,
                      I=state.I + new_infections - recoveries,
                      R=state.R + recoveries)


@dataclass
class Trajectory:
    """Per-step (S, I, R) series; integer-valued when it came from the
    stochastic engine, real-valued from the mean-field one."""

    t: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def state(self, index: int) -> MacroState:
        return MacroState(t=int(self.t[index]), S=float(self.S[index]),
                          I=float(self.I[index]), R=float(self.R[index]))

    def write_csv(self, path) -> None:
        """CSV with header t,S,I,R at full double precision."""
        with open(path, "w") as fh:
            fh.write("t,S,I,R\n")
            for t, s, i, r in zip(self.t, self.S, self.I, self.R):
                fh.write(f"{int(t)},{s:.17g},{i:.17g},{r:.17g}\n")


def run_meanfield(params: ModelParams, topo: Topology, init: MacroState,
                  steps: int) -> Trajectory:
    """Iterate the recurrence; element 0 of the result is `init`."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    t = np.empty(steps + 1, dtype=np.int64)
    s = np.empty(steps + 1)
    i = np.empty(steps + 1)
    r = np.empty(steps + 1)
    state = init
    for k in range(steps + 1):
        t[k], s[k], i[k], r[k] = state.t, state.S, state.I, state.R
        if k < steps:
            state = meanfield_step(params, state, topo)
    return Trajectory(t=t, S=s, I=i, R=r)


def rates_to_mixing(rates: EffectiveRates, topo: Topology | None = None,
                    ) -> tuple[float, float, float, float]:
    """Solve b_x = alpha_x * lambda / space_x for (lambda, alphas).

    Summing over the three mechanisms and using alpha_g+alpha_l+alpha_n = 1
    gives the closed form

        lambda  = 256 b_l + 2560 b_n + 2^30 b_g
        alpha_x = space_x * b_x / lambda

    The probe-space sizes are fixed model constants; `topo` is accepted for
    symmetry with the other operations.  Raises DegenerateRatesError when
    every rate is zero (no probing at all carries no mixing information).
    """
    local, neigh, glob = ((topo.local_space, topo.neigh_space,
                           topo.global_space) if topo is not None
                          else (LOCAL_SPACE, NEIGH_SPACE, GLOBAL_SPACE))
    lam = local * rates.b_l + neigh * rates.b_n + glob * rates.b_g
    if lam <= 0.0:
        raise DegenerateRatesError("all effective rates are zero")
    alpha_l = local * rates.b_l / lam
    alpha_n = neigh * rates.b_n / lam
    alpha_g = glob * rates.b_g / lam
    return lam, alpha_g, alpha_l, alpha_n


def mixing_to_infection_rates(rates: EffectiveRates,
                              alphas: tuple[float, float, float],
                              ) -> tuple[float, float, float]:
    """Recover (beta_l, beta_n, beta_g) from b_x = alpha_x * beta_x.

    `alphas` is ordered (alpha_g, alpha_l, alpha_n).  A zero alpha with a
    nonzero rate, or any implied beta above 1, flags the inputs as
    inconsistent.
    """
    alpha_g, alpha_l, alpha_n = alphas
    betas = []
    for b, alpha, name in ((rates.b_l, alpha_l, "beta_l"),
                           (rates.b_n, alpha_n, "beta_n"),
                           (rates.b_g, alpha_g, "beta_g")):
        if b == 0.0:
            betas.append(0.0)
            continue
        if alpha <= 0.0:
            raise InconsistentRatesError(
                f"nonzero rate with zero mixing probability for {name}")
        beta = b / alpha
        if beta > 1.0:
            raise InconsistentRatesError(f"{name}={beta!r} exceeds 1")
        betas.append(beta)
    return tuple(betas)


PARAMS_FILE_KEYS = ("alpha_g", "alpha_l", "alpha_n",
                    "beta_g", "beta_l", "beta_n",
                    "gamma", "lambda", "tau_minutes")


def write_params_file(params: ModelParams, path) -> None:
    """Flat key-value export; tau_minutes is the mean windows-to-recovery
    converted to minutes (10/gamma)."""
    tau = WINDOW_MINUTES / params.gamma if params.gamma > 0 else math.inf
    values = {
        "alpha_g": params.alpha_g, "alpha_l": params.alpha_l,
        "alpha_n": params.alpha_n, "beta_g": params.beta_g,
        "beta_l": params.beta_l, "beta_n": params.beta_n,
        "gamma": params.gamma, "lambda": params.lam, "tau_minutes": tau,
    }
    with open(path, "w") as fh:
        for key in PARAMS_FILE_KEYS:
            fh.write(f"{key} = {values[key]:.17g}\n")


def read_params_file(path) -> ModelParams:
    """Parse the flat key-value format written by write_params_file.

    Unknown keys are rejected; tau_minutes is accepted and ignored (it is
    derived from gamma).
    """
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, text = line.partition("=")
            key = key.strip()
            if key not in PARAMS_FILE_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = float(text.strip())
    missing = [k for k in PARAMS_FILE_KEYS if k not in values
               and k != "tau_minutes"]
    if missing:
        raise ValueError(f"{path}: missing keys {missing}")
    return ModelParams(alpha_g=values["alpha_g"], alpha_l=values["alpha_l"],
                       alpha_n=values["alpha_n"], beta_g=values["beta_g"],
                       beta_l=values["beta_l"], beta_n=values["beta_n"],
                       gamma=values["gamma"], lam=values["lambda"])
