"""Recover known parameters from a synthetic telescope log.

A telescope monitoring 1/64th of the global space watches a simulated
outbreak over 4,000 subnets.  Only globally-aimed probes can land in the
monitored block, so the log is a thin, biased shadow of the epidemic —
the inference pipeline rebuilds per-source timelines, attributes each
infection onset to the mechanism that best explains it, inverts the
escape probabilities window by window, and averages over the growth
phase, where the signal lives.
"""

import tempfile
from pathlib import Path

import numpy as np

from hybridworm.model import CONFICKER_2008
from hybridworm.stochastic import build_topology, generate_telescope_log
from hybridworm import telescope


def main():
    topo = build_topology(4_000, 5, 10, seed=9)
    log = generate_telescope_log(CONFICKER_2008, topo, initial_infected=10,
                                 steps=300, monitor_fraction=1 / 64, seed=55)
    print(f"simulated {topo.total_nodes} nodes for 300 windows; telescope "
          f"captured {len(log)} probes")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "telescope.csv"
        log.write_csv(path)
        parsed = telescope.parse_events(path)
        timelines = telescope.build_timelines(parsed.events)
        series = telescope.attribute_infections(
            timelines, telescope.build_window_series(timelines))
        peak = int(series.windows[np.argmax(series.I)])
        result = telescope.infer_params(series, t_start=peak - 30,
                                        t_end=peak + 10)

    print(f"averaging windows [{result.t_start}, {result.t_end}] "
          f"around the observed peak at {peak} "
          f"({result.n_usable} usable)")
    print()
    print(f"{'parameter':>10} {'truth':>12} {'inferred':>12} {'rel err':>9}")
    truth = CONFICKER_2008
    for name in ("alpha_g", "alpha_l", "alpha_n", "beta_g", "beta_l",
                 "beta_n", "gamma", "lam"):
        t, e = getattr(truth, name), getattr(result.params, name)
        print(f"{name:>10} {t:12.4g} {e:12.4g} {e / t - 1:+9.1%}")

    print()
    print("sources seen:", int(result.diagnostics["nodes"]),
          "in", int(result.diagnostics["subnets"]), "subnets;",
          "onsets:", int(result.diagnostics["onsets_total"]))
    print()
    print("the mixing split (alpha) and recovery rate (gamma) are the robust"
          "\noutputs; the absolute per-window rates inherit the telescope's"
          "\npartial-visibility bias — nodes never caught probing are missing"
          "\nfrom the susceptible pool, which deflates S and inflates every"
          "\ninverted rate (and lambda) by a common factor that cancels out"
          "\nof the alphas.")


if __name__ == "__main__":
    main()
