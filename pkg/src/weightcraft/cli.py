"""``weightcraft`` command-line entry point.

Exit codes: 0 success, 2 validation or configuration error, 3 runtime/model
error. Logs go to stderr (level from ``WEIGHTCRAFT_LOG``); data goes to files
and stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from weightcraft import io
from weightcraft.config import RunConfig, load_config
from weightcraft.datagen import generate_dataset
from weightcraft.errors import ConfigError, ModelError, ValidationError
from weightcraft.estimation import estimate_period
from weightcraft.model import BehaviorProfile, PNorm, user_optimal_weights
from weightcraft.parallel import parallel_map
from weightcraft.rankeval import SCHEMES, run_rank_eval, summarize
from weightcraft.sim import SweepSpec, run_nitems, sweep_optimal_weights
from weightcraft.strategic import equilibrium_effort, producer_optimal_weights

log = logging.getLogger("weightcraft")

EXIT_OK, EXIT_VALIDATION, EXIT_MODEL = 0, 2, 3


def _setup_logging() -> None:
    level = os.environ.get("WEIGHTCRAFT_LOG", "WARNING").upper()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("weightcraft")
    root.handlers[:] = [handler]
    root.setLevel(getattr(logging, level, logging.WARNING))
    root.propagate = False


def parse_p(raw) -> PNorm:
    if isinstance(raw, (int, float)):
        p = float(raw)
    elif str(raw).strip().lower() in ("inf", "infinity"):
        return "inf"
    else:
        try:
            p = float(raw)
        except ValueError:
            raise ValidationError(f"p-norm: cannot parse {raw!r}") from None
    if not p >= 1:
        raise ValidationError(f"p-norm must be >= 1 or inf, got {raw!r}")
    return p


def _vector(raw: Optional[str], name: str):
    if raw is None:
        return None
    try:
        return tuple(float(s) for s in raw.split(",") if s.strip())
    except ValueError:
        raise ValidationError(f"{name}: expected comma-separated numbers, got {raw!r}") from None


def _seed(args, cfg: RunConfig) -> int:
    seed = args.seed if args.seed is not None else cfg.seed
    if seed is None:
        raise ConfigError("a seed is required: pass --seed or set [run] seed")
    if seed < 0:
        raise ConfigError("seed must be nonnegative")
    return int(seed)


def _out_dir(args) -> Path:
    if args.out is None:
        raise ConfigError("--out DIR is required")
    return io.ensure_writable_dir(args.out)


def _threads(args) -> Optional[int]:
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    return args.threads


# --- commands ----------------------------------------------------------------


def cmd_weights(args, cfg: RunConfig) -> int:
    params = cfg.weights
    vf = _vector(args.vf, "vf") or params.vf
    variance = _vector(args.variance, "variance") or params.variance
    cost = _vector(args.cost, "cost") or params.cost
    if cost is params.cost and len(cost) != len(vf):
        cost = (1.0,) * len(vf)
    p = parse_p(args.p_norm if args.p_norm is not None else params.p)
    profile = BehaviorProfile(vf, variance, cost)
    profile.require_positive_vf()
    if args.which == "user-opt":
        w = user_optimal_weights(profile.vf, profile.variance, p)
    else:
        seed = args.seed if args.seed is not None else (cfg.seed or 0)
        w = producer_optimal_weights(profile, p, n_starts=params.n_starts, seed=seed)
    eq = equilibrium_effort(w, profile)
    out = {
        "weights": [float(x) for x in w],
        "user_utility": eq.user_utility,
        "producer_welfare": eq.producer_welfare,
        "equilibrium_effort": [float(x) for x in eq.effort.effort],
    }
    print(json.dumps(out))
    return EXIT_OK


def _grid(cfg: RunConfig, axis: str) -> np.ndarray:
    s = cfg.sweep
    lo, hi = {"value_faithfulness": s.vf_range, "variance": s.variance_range, "strategy_robustness": s.robustness_range}[axis]
    if axis == "value_faithfulness":
        return np.linspace(lo, hi, s.n_points)
    return np.geomspace(lo, hi, s.n_points)


def cmd_simulate(args, cfg: RunConfig) -> int:
    seed = _seed(args, cfg)
    out = _out_dir(args)
    threads = _threads(args)
    written = []
    if args.which == "sweep":
        p = parse_p(args.p_norm if args.p_norm is not None else cfg.sweep.p)
        for axis in cfg.sweep.axes:
            spec = SweepSpec(axis, _grid(cfg, axis), cfg.sweep.behavior_index, cfg.sweep_base, p, seed)
            rows = sweep_optimal_weights(spec, threads)
            written.append((io.write_sweep_csv(out / f"sweep_{axis}.csv", rows), len(rows)))
    else:
        for mode in cfg.nitems.modes:
            if mode not in ("homogeneous", "heterogeneous"):
                raise ConfigError(f"[nitems] unknown mode {mode!r}")
            base = cfg.nitems_homogeneous if mode == "homogeneous" else cfg.nitems_heterogeneous
            config = dataclasses.replace(base, seed=seed)
            rows = run_nitems(config, cfg.nitems.grid_step, threads)
            written.append((io.write_nitems_csv(out / f"nitems_{mode}.csv", rows), len(rows)))
    print("; ".join(f"{path} ({n} rows)" for path, n in written))
    return EXIT_OK


def cmd_data_generate(args, cfg: RunConfig) -> int:
    seed = _seed(args, cfg)
    out = _out_dir(args)
    config = dataclasses.replace(cfg.datagen, seed=seed)
    table, truth = generate_dataset(config, cfg.noise, _threads(args))
    extra = {"seed": seed, "n_urls": config.n_urls, "n_groups": config.n_groups, "n_periods": config.n_periods}
    paths = io.write_dataset(out, table, truth, extra)
    print(
        f"{config.n_urls} URLs, {config.n_periods} periods, {config.n_groups} groups, {len(table)} rows -> "
        + ", ".join(str(p) for p in paths)
    )
    return EXIT_OK


def _data_dir(args) -> Path:
    if args.data is None:
        raise ConfigError("--data DIR is required")
    return Path(args.data)


def cmd_estimate(args, cfg: RunConfig) -> int:
    seed = _seed(args, cfg)
    out = _out_dir(args)
    table, _ = io.read_dataset(_data_dir(args))
    periods = [int(args.period)] if args.period is not None else [int(t) for t in table.periods]
    params = cfg.estimate

    reports = parallel_map(
        lambda t: estimate_period(table, t, params.n_boot_urls, params.n_boot_samples, seed, params.min_views),
        periods,
        _threads(args),
    )
    for rep in reports:
        path = io.write_report(out / io.report_filename(rep.period), rep)
        print(f"period {rep.period}: {len(rep.beta_hat)} URLs -> {path}")
    return EXIT_OK


def cmd_rank_eval(args, cfg: RunConfig) -> int:
    out = _out_dir(args)
    table, truth = io.read_dataset(_data_dir(args), require_truth=True)
    params = cfg.rank_eval
    top_k = args.top_k if args.top_k is not None else params.top_k
    if top_k < 1:
        raise ConfigError("--top-k must be >= 1")
    reports_dir = Path(args.reports) if args.reports else _data_dir(args)
    periods = [int(t) for t in table.periods]
    if args.period is not None:
        periods = [int(args.period) - 1, int(args.period)]
    reports = io.read_reports(reports_dir, periods)
    schemes = [s for s in params.schemes]
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"[rank_eval] unknown scheme {s!r}; expected {SCHEMES}")
    results = run_rank_eval(table, truth, reports, schemes, top_k, params.min_views, _threads(args))
    io.write_rank_eval_csv(out / "rank_eval.csv", results)
    io.write_weights_csv(out / "rank_eval_weights.csv", results)
    n_eligible = {t: len(r.beta_hat) for t, r in reports.items()}
    summary = summarize(results, params.weighting, n_eligible)
    print(json.dumps({"rows": len(results), "means": summary}, sort_keys=False))
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI run configuration")
    common.add_argument("--seed", type=int, metavar="U64", help="root seed for every random stream")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--threads", type=int, metavar="N", help="worker threads (default: available cores)")
    common.add_argument("--period", type=int, metavar="M", help="period index")
    common.add_argument("--top-k", type=int, metavar="K", dest="top_k", help="ranked list length")
    common.add_argument("--p-norm", metavar="P", dest="p_norm", help="weight norm order (>= 1 or inf)")

    parser = argparse.ArgumentParser(prog="weightcraft", description="Behavior-weight design for recommender rankings.")
    sub = parser.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", help="user- or producer-optimal weights for a profile", parents=[common])
    w.add_argument("which", choices=("user-opt", "producer-opt"))
    for flag in ("vf", "variance", "cost"):
        w.add_argument(f"--{flag}", metavar="X,Y,...", help=f"comma-separated {flag} vector")
    w.set_defaults(func=cmd_weights)

    s = sub.add_parser("simulate", help="aspect sweeps or n-item AUC simulations", parents=[common])
    s.add_argument("which", choices=("sweep", "nitems"))
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("data", help="synthetic engagement dataset")
    dsub = d.add_subparsers(dest="data_command", required=True)
    g = dsub.add_parser("generate", parents=[common])
    g.set_defaults(func=cmd_data_generate)

    e = sub.add_parser("estimate", help="per-period estimation reports", parents=[common])
    e.add_argument("--data", metavar="DIR", help="dataset directory")
    e.set_defaults(func=cmd_estimate)

    r = sub.add_parser("rank-eval", help="rank URLs under each weight scheme", parents=[common])
    r.add_argument("--data", metavar="DIR", help="dataset directory")
    r.add_argument("--reports", metavar="DIR", help="directory of estimation reports")
    r.set_defaults(func=cmd_rank_eval)
    return parser


VECTOR_FLAGS = ("--vf", "--variance", "--cost")


def _join_vector_values(argv: Sequence[str]) -> List[str]:
    """Attach vector flag values so a leading minus sign is not read as an option."""
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in VECTOR_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_join_vector_values(argv))
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
