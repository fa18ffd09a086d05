"""Frauchiger-Renner style state: two-time half-box probabilities.

The two-particle state (f b + b f - i b b)/sqrt(3) reproduces the textbook
reasoning chain when each P[a at s, b at u] is computed from the correlator
engine.  Trajectory ensembles agree on the equal-time rows and visibly
disagree on the mixed-time rows, same mechanism as the GHZ demo.
"""

import os

from pilotbox import ExperimentConfig, emit_csv, emit_svg, run_experiment

ROW_LABELS = (
    "P[- at t_q, + at 0 ]",
    "P[+ at t_q, + at t_q]",
    "P[+ at 0,   - at t_q]",
    "P[+ at 0,   + at 0 ]",
)


def main():
    out_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")
    os.makedirs(out_dir, exist_ok=True)

    result = run_experiment(ExperimentConfig("fr", count=2000, seed=19))
    print(f"{'query':<24} {'quantum':>9} {'trajectories':>13} {'deviation':>12}")
    for label, row in zip(ROW_LABELS, result.rows):
        dev = abs(row.bohm_mean - row.quantum) / row.bohm_stderr
        kind = "mixed-time" if dev > 5 else "equal-time"
        print(f"{label:<24} {row.quantum:>9.6f} {row.bohm_mean:>13.6f} "
              f"{dev:>8.1f} SE  ({kind})")

    base = os.path.join(out_dir, "fr")
    emit_csv(result, base + ".csv")
    emit_svg(result, base + ".svg")
    print(f"\nwrote {base}.csv / .svg")


if __name__ == "__main__":
    main()
