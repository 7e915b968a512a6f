"""Predict an outbreak day from a measured early-morning state.

The built-in "conficker-2008" preset carries the per-10-minute-window
parameters inferred from telescope observations of the November 2008
outbreak.  Starting from the measured 4:00 state — 3,945 infected and
2,291 already recovered among 430,135 relevant hosts — the mean-field
recurrence projects the rest of the day hour by hour.
"""

from hybridworm.experiments import predict_outbreak
from hybridworm.model import (CONFICKER_2008, OUTBREAK_2008_INIT,
                              OUTBREAK_2008_TOPOLOGY)

STEPS = 72  # 4:00 + 72 ten-minute windows = 16:00


def clock(step):
    minutes = 4 * 60 + 10 * step
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def main():
    traj = predict_outbreak(CONFICKER_2008, OUTBREAK_2008_TOPOLOGY,
                            OUTBREAK_2008_INIT, STEPS)
    total = traj.S[0] + traj.I[0] + traj.R[0]

    print(f"population: {total:.0f} relevant hosts in "
          f"{OUTBREAK_2008_TOPOLOGY.num_subnets:.0f} subnets")
    print(f"{'time':>6} {'S':>10} {'I':>10} {'R':>10} {'infected-ever':>14}")
    for step in range(0, STEPS + 1, 6):
        s, i, r = traj.S[step], traj.I[step], traj.R[step]
        print(f"{clock(step):>6} {s:10.0f} {i:10.0f} {r:10.0f} "
              f"{(i + r) / total:13.1%}")

    print()
    print(f"by 16:00 the model leaves {traj.S[-1] / total:.1%} of hosts "
          f"untouched; {traj.I[-1] / total:.1%} are actively probing")


if __name__ == "__main__":
    main()
