"""Closed-loop waypoint guidance on all three feedback strategies.

A vehicle starting at (1,1,0) visits four waypoints guided only by
per-axis feedback from 50 noisy sensors.  Continuous averaging moves
fastest (unclamped feedback far from the target); majority-vote
feedback moves at a fixed step; the over-the-air variant adds channel
errors yet tracks the ideal majority-vote trajectory closely at m=6.
"""

import numpy as np

from airmv import GuidanceConfig, run_mission

WAYPOINTS = [(1.0, 1.0, 6.0), (1.0, 4.0, 6.0), (7.0, 4.0, 6.0), (7.0, 4.0, 0.0)]
START = (1.0, 1.0, 0.0)


def describe(label, log):
    legs = [int((log.waypoint_index == i).sum()) for i in range(len(WAYPOINTS))]
    print(f"{label:12s} rounds={log.rounds:5d} ({log.rounds * log.t_update:5.1f} s)"
          f"  completed={log.completed}  rounds per leg={legs}")


def main():
    print(f"waypoints: {WAYPOINTS}, start {START}, K=50, SNR=10 dB\n")
    logs = {}
    for strategy in ("continuous", "ideal_mv", "oac_mv"):
        cfg = GuidanceConfig(strategy=strategy, m=6, max_rounds=40_000)
        logs[strategy] = run_mission(WAYPOINTS, START, cfg, seed=2)
        describe(strategy, logs[strategy])

    ideal, oac = logs["ideal_mv"], logs["oac_mv"]
    n = min(ideal.rounds, oac.rounds)
    gap = np.linalg.norm(oac.position[:n] - ideal.position[:n], axis=1)
    print(f"\nover-the-air vs ideal majority vote (same sensor noise):")
    print(f"  mean position gap {gap.mean():.3f} m, worst {gap.max():.3f} m")

    detected = oac.mv_detected
    truth = oac.mv_true
    per_axis = (detected != truth).mean(axis=0)
    print(f"  per-axis detection disagreement: "
          f"x {per_axis[0]:.3f}, y {per_axis[1]:.3f}, z {per_axis[2]:.3f}")
    print("\nDisagreements cluster near arrival, where the true majority is")
    print("itself a coin flip; in transit the detected votes are reliable.")


if __name__ == "__main__":
    main()
