"""Compare theory-optimal and AUC-optimal weights over repeated n-item simulations."""

import argparse
from pathlib import Path

import numpy as np

from weightcraft.io import write_nitems_csv
from weightcraft.sim import bootstrap_mean_ci, het_sim_config, hom_sim_config, mean_weight_gap, run_nitems


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/nitems")
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    out = Path(args.out)
    for mode, cfg in (("homogeneous", hom_sim_config(seed=args.seed)), ("heterogeneous", het_sim_config(seed=args.seed))):
        rows = run_nitems(cfg, 0.01, args.threads)
        write_nitems_csv(out / f"nitems_{mode}.csv", rows)
        emp = np.array([r.w1_empirical for r in rows])
        lo, hi = bootstrap_mean_ci(emp, seed=args.seed)
        print(
            f"{mode:13s} mean w1 theory {np.mean([r.w1_theory for r in rows]):.4f}  "
            f"empirical {emp.mean():.4f} [95% CI {lo:.4f}, {hi:.4f}]  mean gap {mean_weight_gap(rows):.4f}"
        )


if __name__ == "__main__":
    main()
