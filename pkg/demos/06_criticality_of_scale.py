"""The hybrid mixture's ignition depends on population size.

With the preset rates, a (alpha_g, alpha_l) = (0.8, 0.2) mixture spreads
by letting local probing saturate a subnet "colony" while sparse global
probes seed new colonies.  Each colony fires a roughly fixed number of
global probes before burning out, and every probe hits a relevant host
with probability proportional to the population over the 2^30 space —
so expected colony offspring scale with population.  At 50,000 nodes
the mixture fizzles within a few subnets every time; at 500,000 the
same parameters clear the colony-reproduction threshold — ignition from
two seeds stays a coin flip, but every run that ignites takes about 70%
of the network.
"""

import numpy as np

from hybridworm.experiments import topology_seed
from hybridworm.model import CONFICKER_2008
from hybridworm.seeds import derive_seed
from hybridworm.stochastic import build_topology, run_sim

PARAMS = CONFICKER_2008.with_alphas(0.8, 0.2, 0.0)


def shares(num_subnets, runs, master_seed):
    topo = build_topology(num_subnets, 5, 4, topology_seed(master_seed))
    out = []
    for r in range(runs):
        m = run_sim(PARAMS, topo, 2, 5000, derive_seed(master_seed, r)).metrics
        out.append(m.final_size / topo.total_nodes)
    return np.array(out)


def main():
    print("final outbreak share under alpha = (0.8, 0.2, 0.0):")
    for num_subnets, runs, seed in ((10_000, 10, 4), (100_000, 4, 77)):
        s = shares(num_subnets, runs, seed)
        ignited = s > 0.5
        print()
        print(f"  population {num_subnets * 5:>7}: "
              f"mean {s.mean():6.1%}, ignited {int(ignited.sum())}/{runs}")
        print("    per run: " + ", ".join(f"{v:.1%}" for v in s))
        if ignited.any():
            print(f"    mean share when ignited: {s[ignited].mean():.1%}")


if __name__ == "__main__":
    main()
