"""Write the user-optimal weight of behavior 2 over a (value-faithfulness, variance) grid.

Output: CSV with columns vf_2, variance_2, w_user_2.
"""

import argparse
from pathlib import Path

import numpy as np

from weightcraft.io import write_csv
from weightcraft.sim import fig1_base, user_weight_surface


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/user_weight_surface.csv")
    ap.add_argument("--n", type=int, default=40, help="grid points per axis")
    args = ap.parse_args()

    vf_grid = np.linspace(0.25, 5.0, args.n)
    var_grid = np.geomspace(1e-2, 1e2, args.n)
    surface = user_weight_surface(vf_grid, var_grid, fig1_base())
    rows = ((vf, var, surface[i, j]) for i, vf in enumerate(vf_grid) for j, var in enumerate(var_grid))
    path = write_csv(Path(args.out), ("vf_2", "variance_2", "w_user_2"), rows)
    print(f"{args.n * args.n} rows -> {path}")


if __name__ == "__main__":
    main()
