"""Hybrid-spreading worm epidemics: model, simulator, inference, sweeps.

The package splits along the natural seams of the problem:

- ``model``: the deterministic mean-field recurrence and the algebra tying
  effective rates, mixing probabilities, and probing frequency together.
- ``stochastic``: the per-node simulator over an explicit subnet ring and
  the synthetic telescope that observes it.
- ``telescope``: log parsing and the three-step parameter inference.
- ``experiments``: mixing sweeps, the recovery-time what-if, and outbreak
  prediction.
- ``cli``: the ``hybridworm`` command wiring it all together.
"""

from .model import (CONFICKER_2008, GLOBAL_SPACE, LOCAL_SPACE, NEIGH_SPACE,
                    OUTBREAK_2008_INIT, OUTBREAK_2008_TOPOLOGY, PRESETS,
                    DegenerateRatesError, EffectiveRates,
                    InconsistentRatesError, MacroState, ModelParams,
                    Topology, Trajectory, escape_probabilities,
                    meanfield_step, mixing_to_infection_rates,
                    rates_to_mixing, read_params_file, run_meanfield,
                    write_params_file)
from .seeds import derive_seed, splitmix64
from .stochastic import (MicroState, OutbreakMetrics, SimResult, SimTopology,
                         TelescopeLog, build_topology,
                         generate_telescope_log, node_address, run_sim,
                         sim_step, write_metrics_csv)
from .telescope import (InferenceResult, NodeTimeline, NoUsableWindowsError,
                        ParseResult, ProbeEvent, WindowRates, WindowSeries,
                        attribute_infections, attribute_nodes,
                        build_timelines, build_window_series,
                        estimate_window_rates, filter_background,
                        infer_from_log, infer_params, parse_events)
from .experiments import (SweepConfig, SweepResult, predict_outbreak,
                          sweep_three, sweep_two, three_mechanism_grid,
                          two_mechanism_grid, whatif_recovery,
                          write_whatif_csv)

__version__ = "0.1.0"
