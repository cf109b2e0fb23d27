"""Sweep one behavior aspect at a time and record user- and producer-optimal weights.

Writes sweep_<axis>.csv for value_faithfulness, variance and strategy_robustness,
then prints whether each directional property holds.
"""

import argparse
from pathlib import Path

import numpy as np

from weightcraft.io import write_sweep_csv
from weightcraft.sim import AXES, SweepSpec, default_grid, sweep_optimal_weights


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/sweeps")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    out = Path(args.out)
    for axis in AXES:
        rows = sweep_optimal_weights(SweepSpec(axis, default_grid(axis, args.n)), args.threads)
        write_sweep_csv(out / f"sweep_{axis}.csv", rows)
        w_user = np.array([r.w_user[1] for r in rows])
        w_prod = np.array([r.w_prod[1] for r in rows])
        welfare = np.array([r.producer_welfare for r in rows])
        print(
            f"{axis:20s} user-opt w2 {w_user[0]:.3f} -> {w_user[-1]:.3f}  "
            f"producer-opt w2 {w_prod[0]:.3f} -> {w_prod[-1]:.3f}  "
            f"welfare range [{welfare.min():.4f}, {welfare.max():.4f}]"
        )


if __name__ == "__main__":
    main()
