"""Walk each mechanism pair along the mixing-probability edge.

Per-window infection rates stay fixed at the preset values while the
mixing probabilities trade off against each other.  The tables show the
hybrid effect at a small topology (2,000 subnets x 5 hosts): local and
neighbourhood probing carry an outbreak across the ring, pure strategies
stall (pure local saturates its own subnets; pure global needs a far
larger population for beta_g = 7.7e-8 to matter; see demo 06).
"""

from hybridworm.experiments import PAIRS, SweepConfig, sweep_two

CONFIG = dict(step=0.2, runs=5, num_subnets=2_000, nodes_per_subnet=5,
              max_steps=3_000, seed=0)


def main():
    population = CONFIG["num_subnets"] * CONFIG["nodes_per_subnet"]
    print(f"population: {population} nodes, {CONFIG['runs']} runs per point")

    for pair in PAIRS:
        result = sweep_two(SweepConfig(pair=pair, **CONFIG))
        left, right = pair.split("-")
        print()
        print(f"--- {pair}: alpha_{right[0]} = 1 - alpha_{left[0]} ---")
        print(f"{'alpha_g':>8} {'alpha_l':>8} {'alpha_n':>8} "
              f"{'mean final':>11} {'share':>7} {'survival':>9}")
        for alphas, mean in zip(result.alphas, result.mean):
            print(f"{alphas[0]:8.1f} {alphas[1]:8.1f} {alphas[2]:8.1f} "
                  f"{mean[0]:11.0f} {mean[0] / population:6.1%} "
                  f"{mean[2]:9.0f}")


if __name__ == "__main__":
    main()
